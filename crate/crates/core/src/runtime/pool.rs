//! Enabled steps of a pool and their application.

use std::collections::BTreeMap;

use serde::Serialize;

use super::term::{at_path, at_path_mut, contract, peel, redex_path, Contraction, Stuck};
use super::{Pool, ResourceBag};
use crate::solver::{holds_under, Assignment};
use crate::statics::*;
use crate::syntax::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Lift,
    Fork,
    Cut,
    Elim,
    Split,
    Bmsg,
    Msg,
    End,
    Quan,
    Branch,
    Fix,
    Gc,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Lift => "lift",
            StepKind::Fork => "fork",
            StepKind::Cut => "cut",
            StepKind::Elim => "elim",
            StepKind::Split => "split",
            StepKind::Bmsg => "bmsg",
            StepKind::Msg => "msg",
            StepKind::End => "end",
            StepKind::Quan => "quan",
            StepKind::Branch => "branch",
            StepKind::Fix => "fix",
            StepKind::Gc => "gc",
        }
    }

    pub fn from_name(s: &str) -> Option<StepKind> {
        use StepKind::*;
        [Lift, Fork, Cut, Elim, Split, Bmsg, Msg, End, Quan, Branch, Fix, Gc]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

/// A step the pool can take: the rule, the channel it synchronizes on (for
/// session steps) and the threads involved, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EnabledStep {
    pub kind: StepKind,
    pub channel: Option<ChannelId>,
    pub threads: Vec<usize>,
}

/// What a thread is waiting on.
#[derive(Clone, Debug)]
pub(crate) struct Waiting {
    pub path: Vec<usize>,
    pub api: ApiName,
    pub endpoint: Endpoint,
}

pub(crate) enum ThreadState {
    Value,
    Local,
    PoolOp(ApiName),
    Waiting(Waiting),
    Stuck(String),
}

pub(crate) fn thread_state(e: &DynTerm) -> ThreadState {
    let Some(path) = redex_path(e) else {
        return ThreadState::Value;
    };
    match contract(at_path(e, &path)) {
        Contraction::Reduced(_) => ThreadState::Local,
        Contraction::Stuck(Stuck::Blocked { api, endpoint }) => match api {
            ApiName::Fork | ApiName::Cut | ApiName::Elim | ApiName::Split => ThreadState::PoolOp(api),
            _ => match endpoint {
                Some(endpoint) => ThreadState::Waiting(Waiting { path, api, endpoint }),
                None => ThreadState::Stuck(format!("`{}` applied to a non-endpoint", api)),
            },
        },
        Contraction::Stuck(Stuck::Genuine(m)) => ThreadState::Stuck(m),
        Contraction::Stuck(Stuck::Value) => ThreadState::Value,
    }
}

/// Threads blocked on a session API, keyed by thread id.
pub(crate) fn waiting_threads(pool: &Pool) -> BTreeMap<usize, Waiting> {
    pool.threads
        .iter()
        .filter_map(|(t, e)| match thread_state(e) {
            ThreadState::Waiting(w) => Some((*t, w)),
            _ => None,
        })
        .collect()
}

fn role(s: &Static) -> Option<i64> {
    match s {
        Static::Int(r) => Some(*r),
        _ => None,
    }
}

/// The universe and the normalized head constructor of a live channel.
fn channel_head(pool: &Pool, c: ChannelId) -> Option<(Vec<i64>, SessionType)> {
    let st = pool.sig.get(&c)?;
    let u = universe_of(st)?.to_vec();
    let body = normalize_stype(st.strip_within().1, Some(&u));
    Some((u, body))
}

/// The API each endpoint must be blocked on for the head of its channel.
fn expected_api(head: &SessionType, roles: &[i64]) -> Option<ApiName> {
    let has = |r: &Static| role(r).map(|r| roles.contains(&r));
    Some(match head {
        SessionType::BMsg { sender, .. } => {
            if has(sender)? {
                ApiName::BSend
            } else {
                ApiName::BRecv
            }
        }
        SessionType::PMsg { sender, receiver, .. } => match (has(sender)?, has(receiver)?) {
            (true, false) => ApiName::Send,
            (false, true) => ApiName::Recv,
            _ => ApiName::Skip,
        },
        SessionType::End(r) => {
            if has(r)? {
                ApiName::Close
            } else {
                ApiName::Wait
            }
        }
        SessionType::Quan { role: r, .. } => {
            if has(r)? {
                ApiName::Unify
            } else {
                ApiName::Exify
            }
        }
        SessionType::Branch { role: r, .. } => {
            if has(r)? {
                ApiName::Offer
            } else {
                ApiName::Choose
            }
        }
        SessionType::Fix(_) => ApiName::Recurse,
        _ => return None,
    })
}

fn kind_of_head(head: &SessionType) -> StepKind {
    match head {
        SessionType::BMsg { .. } => StepKind::Bmsg,
        SessionType::PMsg { .. } => StepKind::Msg,
        SessionType::End(_) => StepKind::End,
        SessionType::Quan { .. } => StepKind::Quan,
        SessionType::Branch { .. } => StepKind::Branch,
        _ => StepKind::Fix,
    }
}

fn count_endpoints(all: &ResourceBag, c: ChannelId) -> usize {
    all.iter().filter(|e| e.channel == c).count()
}

/// The threads of `c`'s cohort when every endpoint of `c` is blocked on a
/// partial redex matching the head of `sig(c)`.
fn match_channel(pool: &Pool, all: &ResourceBag, waiting: &BTreeMap<usize, Waiting>, c: ChannelId) -> Option<EnabledStep> {
    let (u, head) = channel_head(pool, c)?;
    let cohort: Vec<(&usize, &Waiting)> = waiting.iter().filter(|(_, w)| w.endpoint.channel == c).collect();
    if cohort.is_empty() || cohort.len() != count_endpoints(all, c) {
        return None;
    }
    let mut held: Vec<i64> = cohort.iter().flat_map(|(_, w)| w.endpoint.roles.iter().copied()).collect();
    held.sort_unstable();
    if held != u {
        return None;
    }
    for (t, w) in &cohort {
        if expected_api(&head, &w.endpoint.roles)? != w.api {
            return None;
        }
        if w.api == ApiName::Unify {
            let node = at_path(&pool.threads[t], &w.path);
            if !matches!(node, DynTerm::ForallElim { arg: Some(_), .. }) {
                return None;
            }
        }
    }
    Some(EnabledStep {
        kind: kind_of_head(&head),
        channel: Some(c),
        threads: cohort.iter().map(|(t, _)| **t).collect(),
    })
}

fn call_statics(node: &DynTerm) -> &[Static] {
    match peel(node) {
        DynTerm::ApiCall { statics, .. } => statics,
        DynTerm::ForallElim { body, .. } => call_statics(body),
        _ => &[],
    }
}

/// With proof functions erased, a point-to-point message needs only its
/// sender and receiver; the roles come from the elaborated static arguments.
fn match_erased(pool: &Pool, all: &ResourceBag, waiting: &BTreeMap<usize, Waiting>, c: ChannelId) -> Vec<EnabledStep> {
    let on_c: Vec<(&usize, &Waiting)> = waiting.iter().filter(|(_, w)| w.endpoint.channel == c).collect();
    let roles_of = |t: &usize, w: &Waiting| -> Option<(i64, i64)> {
        let st = call_statics(at_path(&pool.threads[t], &w.path));
        Some((role(st.get(1)?)?, role(st.get(2)?)?))
    };
    let mut out = vec![];
    for (ts, ws) in on_c.iter().filter(|(_, w)| w.api == ApiName::Send) {
        for (tr, wr) in on_c.iter().filter(|(_, w)| w.api == ApiName::Recv) {
            if roles_of(ts, ws).is_some() && roles_of(ts, ws) == roles_of(tr, wr) {
                let mut threads = vec![**ts, **tr];
                threads.sort_unstable();
                out.push(EnabledStep {
                    kind: StepKind::Msg,
                    channel: Some(c),
                    threads,
                });
            }
        }
    }
    // the remaining rules need the whole cohort
    let full = !on_c.is_empty() && on_c.len() == count_endpoints(all, c);
    if full {
        let apis: Vec<ApiName> = on_c.iter().map(|(_, w)| w.api).collect();
        let one_and_rest = |lead: ApiName, rest: ApiName| {
            apis.iter().filter(|a| **a == lead).count() == 1 && apis.iter().all(|a| *a == lead || *a == rest)
        };
        let kind = if one_and_rest(ApiName::BSend, ApiName::BRecv) {
            Some(StepKind::Bmsg)
        } else if one_and_rest(ApiName::Close, ApiName::Wait) {
            Some(StepKind::End)
        } else if one_and_rest(ApiName::Unify, ApiName::Exify) {
            Some(StepKind::Quan)
        } else if one_and_rest(ApiName::Offer, ApiName::Choose) {
            Some(StepKind::Branch)
        } else {
            None
        };
        if let Some(kind) = kind {
            out.push(EnabledStep {
                kind,
                channel: Some(c),
                threads: on_c.iter().map(|(t, _)| **t).collect(),
            });
        }
    }
    out
}

/// Every step the pool can take, in a deterministic order. With
/// `erase_proofs`, `skip` and `recurse` reduce locally and messages match on
/// the calls alone.
pub fn find_enabled(pool: &Pool, erase_proofs: bool) -> Vec<EnabledStep> {
    let mut out = vec![];
    let mut waiting = BTreeMap::new();
    for (t, e) in &pool.threads {
        let single = |kind| EnabledStep {
            kind,
            channel: None,
            threads: vec![*t],
        };
        match thread_state(e) {
            ThreadState::Value if *t > 0 => out.push(single(StepKind::Gc)),
            ThreadState::Local => out.push(single(StepKind::Lift)),
            ThreadState::PoolOp(api) => out.push(single(match api {
                ApiName::Fork => StepKind::Fork,
                ApiName::Cut => StepKind::Cut,
                ApiName::Elim => StepKind::Elim,
                _ => StepKind::Split,
            })),
            ThreadState::Waiting(w) if erase_proofs && matches!(w.api, ApiName::Skip | ApiName::Recurse) => {
                out.push(single(StepKind::Lift))
            }
            ThreadState::Waiting(w) => {
                waiting.insert(*t, w);
            }
            _ => {}
        }
    }
    let all = pool.resources();
    for c in pool.sig.keys() {
        if erase_proofs {
            out.extend(match_erased(pool, &all, &waiting, *c));
        } else if let Some(step) = match_channel(pool, &all, &waiting, *c) {
            out.push(step);
        }
    }
    out
}

/// A channel's protocol for trace summaries.
pub(crate) fn sig_summary(pool: &Pool) -> BTreeMap<String, String> {
    pool.sig.iter().map(|(c, st)| (c.to_string(), st.to_string())).collect()
}

fn roles_value(s: &Static, u: Option<&[i64]>) -> Result<Vec<i64>, String> {
    match normalize_static(s, u) {
        Static::Set(v) => Ok(v),
        Static::Full => u.map(|u| u.to_vec()).ok_or_else(|| "`full` without a universe".into()),
        other => Err(format!("role set `{}` is not ground", other)),
    }
}

fn rename_channels(e: &DynTerm, map: &BTreeMap<ChannelId, ChannelId>) -> DynTerm {
    match e {
        DynTerm::Endpoint(ep) => match map.get(&ep.channel) {
            Some(c) => DynTerm::Endpoint(Endpoint::new(*c, ep.roles.clone())),
            None => e.clone(),
        },
        _ => {
            let mut out = e.clone();
            let n = e.children().len();
            for i in 0..n {
                let new = rename_channels(at_path(e, &[i]), map);
                *at_path_mut(&mut out, &[i]) = new;
            }
            out
        }
    }
}

fn endpoint_arg(node: &DynTerm, i: usize) -> Result<Endpoint, String> {
    match peel(node) {
        DynTerm::ApiCall { args, .. } => match args.get(i).map(peel) {
            Some(DynTerm::Endpoint(ep)) => Ok(ep.clone()),
            _ => Err(format!("argument {} of `{}` is not an endpoint", i + 1, node)),
        },
        _ => Err(format!("`{}` is not an API call", node)),
    }
}

fn api_args(node: &DynTerm) -> &[DynTerm] {
    match peel(node) {
        DynTerm::ApiCall { args, .. } => args,
        DynTerm::ForallElim { body, .. } => api_args(body),
        _ => &[],
    }
}

/// Checks a guard the checker deferred to run time.
fn check_runtime_guard(node: &DynTerm, u: Option<&[i64]>) -> Result<(), String> {
    let guard = match peel(node) {
        DynTerm::ApiCall { runtime_guard, .. } => runtime_guard.clone(),
        DynTerm::ForallElim { body, .. } => match peel(body) {
            DynTerm::ApiCall { runtime_guard, .. } => runtime_guard.clone(),
            _ => None,
        },
        _ => None,
    };
    match guard {
        None => Ok(()),
        Some(g) => match holds_under(&normalize_static(&g, u), &Assignment::new(), u) {
            Some(true) => Ok(()),
            _ => Err(format!("runtime guard `{}` failed", g)),
        },
    }
}

fn within(u: &[i64], st: SessionType) -> SessionType {
    normalize_stype(&SessionType::within(u.to_vec(), st), Some(u))
}

/// Result of applying a step: the payload type of a message, if any.
pub(crate) struct Applied {
    pub payload_type: Option<String>,
}

/// Applies one enabled step in place.
pub fn apply_step(pool: &mut Pool, step: &EnabledStep, erase_proofs: bool) -> Result<(), String> {
    apply(pool, step, erase_proofs).map(|_| ())
}

pub(crate) fn apply(pool: &mut Pool, step: &EnabledStep, erase_proofs: bool) -> Result<Applied, String> {
    let none = Applied { payload_type: None };
    match step.kind {
        StepKind::Gc => {
            pool.threads.remove(&step.threads[0]);
            Ok(none)
        }
        StepKind::Lift => {
            let t = step.threads[0];
            let e = &pool.threads[&t];
            let path = redex_path(e).ok_or("lift on a value")?;
            let node = at_path(e, &path);
            let new = match contract(node) {
                Contraction::Reduced(r) => r,
                // erased proof functions return their endpoint
                Contraction::Stuck(Stuck::Blocked {
                    api: ApiName::Skip | ApiName::Recurse,
                    endpoint: Some(ep),
                }) => DynTerm::Endpoint(ep),
                _ => return Err(format!("thread {} has no local redex", t)),
            };
            let e = pool.threads.get_mut(&t).expect("thread exists");
            *at_path_mut(e, &path) = new;
            Ok(none)
        }
        StepKind::Fork | StepKind::Split | StepKind::Cut | StepKind::Elim => pool_op(pool, step),
        _ => synchronize(pool, step, erase_proofs),
    }
}

fn pool_op(pool: &mut Pool, step: &EnabledStep) -> Result<Applied, String> {
    let t = step.threads[0];
    let e = pool.threads[&t].clone();
    let path = redex_path(&e).ok_or("pool step on a value")?;
    let node = at_path(&e, &path).clone();
    let DynTerm::ApiCall { statics, args, .. } = &node else {
        return Err(format!("`{}` is not an API call", node));
    };
    let replacement = match step.kind {
        StepKind::Fork => {
            let [rs1, rs2, p] = statics.as_slice() else {
                return Err("fork without its elaborated static arguments".into());
            };
            let proto = SessionType::embed(p.clone());
            let u = universe_of(&proto).ok_or("fork of a protocol without a universe")?.to_vec();
            check_runtime_guard(&node, Some(&u))?;
            let c = ChannelId(pool.next_channel);
            pool.next_channel += 1;
            pool.sig.insert(c, within(&u, proto));
            let child = DynTerm::app(args[0].clone(), DynTerm::Endpoint(Endpoint::new(c, roles_value(rs1, Some(&u))?)));
            pool.threads.insert(pool.next_thread, child);
            pool.next_thread += 1;
            DynTerm::Endpoint(Endpoint::new(c, roles_value(rs2, Some(&u))?))
        }
        StepKind::Split => {
            let ep = endpoint_arg(&node, 0)?;
            let u = pool.universes().get(&ep.channel).cloned().ok_or("split on a dead channel")?;
            let (rs1, rs2) = match statics.as_slice() {
                [rs1, rs2, _] => (roles_value(rs1, Some(&u))?, roles_value(rs2, Some(&u))?),
                _ => return Err("split without its elaborated static arguments".into()),
            };
            let mut joined = [rs1.clone(), rs2.clone()].concat();
            joined.sort_unstable();
            if joined != ep.roles {
                return Err(format!("split of {} into {:?} and {:?}", ep, rs1, rs2));
            }
            let child = DynTerm::app(args[1].clone(), DynTerm::Endpoint(Endpoint::new(ep.channel, rs1)));
            pool.threads.insert(pool.next_thread, child);
            pool.next_thread += 1;
            DynTerm::Endpoint(Endpoint::new(ep.channel, rs2))
        }
        StepKind::Elim => {
            let ep = endpoint_arg(&node, 0)?;
            if !ep.roles.is_empty() {
                return Err(format!("elim on the non-empty endpoint {}", ep));
            }
            DynTerm::Unit
        }
        _ => {
            let a = endpoint_arg(&node, 0)?;
            let b = endpoint_arg(&node, 1)?;
            let sa = pool.sig.get(&a.channel).cloned().ok_or("cut on a dead channel")?;
            if !pool.sig.contains_key(&b.channel) || a.channel == b.channel {
                return Err(format!("cut of {} and {}", a, b));
            }
            let c = ChannelId(pool.next_channel);
            pool.next_channel += 1;
            pool.sig.remove(&a.channel);
            pool.sig.remove(&b.channel);
            pool.sig.insert(c, sa);
            let inter: Vec<i64> = a.roles.iter().copied().filter(|r| b.roles.contains(r)).collect();
            let th = pool.threads.get_mut(&t).expect("thread exists");
            *at_path_mut(th, &path) = DynTerm::Endpoint(Endpoint::new(c, inter));
            let map = BTreeMap::from([(a.channel, c), (b.channel, c)]);
            for body in pool.threads.values_mut() {
                *body = rename_channels(body, &map);
            }
            return Ok(Applied { payload_type: None });
        }
    };
    let th = pool.threads.get_mut(&t).expect("thread exists");
    *at_path_mut(th, &path) = replacement;
    Ok(Applied { payload_type: None })
}

fn binder_parts(binder: &Static) -> (Name, Sort) {
    match binder {
        Static::Lam(a, s, _) => (a.clone(), s.clone()),
        _ => ("a".into(), Sort::Int),
    }
}

/// Advances a cohort. Without proof functions the signature no longer
/// tracks the protocol, so only `end` updates it and no annotations are
/// attached to the results.
fn synchronize(pool: &mut Pool, step: &EnabledStep, erased: bool) -> Result<Applied, String> {
    let c = step.channel.ok_or("session step without a channel")?;
    let (u, head) = channel_head(pool, c).ok_or_else(|| format!("{} is not live", c))?;
    let head = if erased { SessionType::Embed(Static::Full) } else { head };
    let uo = Some(u.as_slice());
    let waiting = waiting_threads(pool);
    let members: Vec<(usize, Waiting)> = step
        .threads
        .iter()
        .map(|t| waiting.get(t).cloned().map(|w| (*t, w)).ok_or(format!("thread {} is not blocked", t)))
        .collect::<Result<_, _>>()?;
    for (t, w) in &members {
        check_runtime_guard(at_path(&pool.threads[t], &w.path), uo)?;
    }
    let node_of = |pool: &Pool, t: usize, w: &Waiting| at_path(&pool.threads[&t], &w.path).clone();

    let mut payload_type = None;
    let mut replacements: Vec<(usize, Vec<usize>, DynTerm)> = vec![];
    let mut next_sig: Option<SessionType> = None;
    let me = |w: &Waiting| DynTerm::Endpoint(w.endpoint.clone());

    match step.kind {
        StepKind::Bmsg | StepKind::Msg => {
            let sender = members
                .iter()
                .find(|(_, w)| matches!(w.api, ApiName::BSend | ApiName::Send))
                .ok_or("message step without a sender")?;
            let value = api_args(&node_of(pool, sender.0, &sender.1)).get(1).cloned().ok_or("send without a value")?;
            for (t, w) in &members {
                let new = match w.api {
                    ApiName::BRecv | ApiName::Recv => DynTerm::pair(me(w), value.clone()),
                    _ => me(w),
                };
                replacements.push((*t, w.path.clone(), new));
            }
            match &head {
                SessionType::BMsg { payload, cont, .. } | SessionType::PMsg { payload, cont, .. } => {
                    payload_type = Some(payload.to_string());
                    next_sig = Some(within(&u, (**cont).clone()));
                }
                // erased mode only checks the calls
                _ => next_sig = None,
            }
        }
        StepKind::End => {
            for (t, w) in &members {
                replacements.push((*t, w.path.clone(), DynTerm::Unit));
            }
        }
        StepKind::Quan => {
            let unifier = members.iter().find(|(_, w)| w.api == ApiName::Unify).ok_or("quan step without unify")?;
            let witness = match node_of(pool, unifier.0, &unifier.1) {
                DynTerm::ForallElim { arg: Some(w), .. } => normalize_static(&w, uo),
                _ => return Err("unify without a witness".into()),
            };
            let binder = match &head {
                SessionType::Quan { binder, .. } => Some(binder.clone()),
                _ if erased => None,
                _ => return Err(format!("{} is not at a quantifier", c)),
            };
            for (t, w) in &members {
                let new = if w.api == ApiName::Unify {
                    me(w)
                } else if let Some(binder) = &binder {
                    let (a, sort) = binder_parts(binder);
                    let body = within(&u, SessionType::embed(Static::app(binder.clone(), Static::Var(a.clone()))));
                    let ann = LinType::Exists(
                        a.clone(),
                        sort.clone(),
                        Box::new(LinType::chan(Static::Set(w.endpoint.roles.clone()), body)),
                    );
                    DynTerm::ExistsIntro {
                        body: Box::new(me(w)),
                        witness: Some(witness.clone()),
                        ann: Some(ann),
                    }
                } else {
                    DynTerm::ExistsIntro {
                        body: Box::new(me(w)),
                        witness: Some(witness.clone()),
                        ann: None,
                    }
                };
                replacements.push((*t, w.path.clone(), new));
            }
            next_sig = binder.map(|b| within(&u, SessionType::embed(Static::app(b, witness))));
        }
        StepKind::Branch => {
            let offerer = members.iter().find(|(_, w)| w.api == ApiName::Offer).ok_or("branch step without offer")?;
            let flag = match api_args(&node_of(pool, offerer.0, &offerer.1)).get(1).map(peel) {
                Some(DynTerm::Lit(Lit::Bool(b))) => *b,
                _ => return Err("offer without a boolean".into()),
            };
            let arms = match &head {
                SessionType::Branch { left, right, .. } => {
                    Some((within(&u, (**left).clone()), within(&u, (**right).clone())))
                }
                _ if erased => None,
                _ => return Err(format!("{} is not at a branch", c)),
            };
            for (t, w) in &members {
                let inj = DynTerm::Inj {
                    right: !flag,
                    body: Box::new(me(w)),
                };
                let new = if w.api == ApiName::Offer {
                    me(w)
                } else if let Some((left, right)) = &arms {
                    let rs = Static::Set(w.endpoint.roles.clone());
                    let ann = LinType::sum(LinType::chan(rs.clone(), left.clone()), LinType::chan(rs, right.clone()));
                    DynTerm::Ascribe(Box::new(inj), ann)
                } else {
                    inj
                };
                replacements.push((*t, w.path.clone(), new));
            }
            next_sig = arms.map(|(l, r)| if flag { l } else { r });
        }
        StepKind::Fix => {
            let binder = match &head {
                SessionType::Fix(b) => b.clone(),
                _ => return Err(format!("{} is not at a recursive protocol", c)),
            };
            for (t, w) in &members {
                replacements.push((*t, w.path.clone(), me(w)));
            }
            next_sig = Some(within(&u, unfold_fix(&binder, uo)));
        }
        k => return Err(format!("`{}` is not a session step", k.as_str())),
    }

    for (t, path, new) in replacements {
        let th = pool.threads.get_mut(&t).expect("thread exists");
        *at_path_mut(th, &path) = new;
    }
    match (step.kind, next_sig) {
        (StepKind::End, _) => {
            pool.sig.remove(&c);
        }
        (_, Some(s)) => {
            pool.sig.insert(c, s);
        }
        _ => {}
    }
    Ok(Applied { payload_type })
}
