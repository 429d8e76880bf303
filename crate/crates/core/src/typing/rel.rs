//! Type equality, subtyping and first-order matching against API schemes.

use std::collections::{BTreeMap, BTreeSet};

use super::diag::{Diagnostic, TResult};
use crate::solver::{entails, Assumptions, Verdict, DEFAULT_BUDGET};
use crate::statics::subst::{free_vars_stype, free_vars_type};
use crate::statics::*;
use crate::syntax::ast::*;

/// Static context of the checker: sorts in scope, path assumptions and
/// solver settings.
#[derive(Clone, Debug)]
pub struct TyEnv {
    pub sorts: SortCtx,
    pub props: Vec<Static>,
    /// Range of set variables whose universe is not otherwise known.
    pub ambient: Vec<i64>,
    pub budget: u64,
}

impl Default for TyEnv {
    fn default() -> Self {
        TyEnv {
            sorts: SortCtx::new(),
            props: vec![],
            ambient: vec![],
            budget: DEFAULT_BUDGET,
        }
    }
}

fn mismatch(what: &str, a: &dyn std::fmt::Display, b: &dyn std::fmt::Display) -> Diagnostic {
    Diagnostic::new("type-mismatch", format!("{} mismatch: `{}` vs `{}`", what, a, b))
}

fn head_name(st: &SessionType) -> &'static str {
    match st {
        SessionType::End(_) => "`end`",
        SessionType::BMsg { .. } => "broadcast `msg`",
        SessionType::PMsg { .. } => "point-to-point `msg`",
        SessionType::Quan { .. } => "`quan`",
        SessionType::Branch { .. } => "`branch`",
        SessionType::Fix(_) => "`fix`",
        SessionType::Within(..) => "`within`",
        SessionType::Embed(_) => "abstract protocol",
    }
}

impl TyEnv {
    pub fn assumptions(&self, universe: Option<&[i64]>) -> Assumptions {
        let mut a = Assumptions::new().budget(self.budget);
        if let Some(u) = universe {
            a = a.with_universe(u);
        }
        for (n, s) in self.sorts.entries() {
            match s {
                Sort::Int => a = a.int_var(n),
                Sort::Bool => a = a.bool_var(n),
                Sort::Set => a = a.set_var(n, universe.unwrap_or(&self.ambient)),
                _ => {}
            }
        }
        for p in &self.props {
            a = a.prop(p.clone());
        }
        a
    }

    pub fn prove(&self, goal: &Static, universe: Option<&[i64]>) -> Verdict {
        let goal = normalize_static(goal, universe);
        if goal == Static::Bool(true) {
            return Verdict::Valid;
        }
        entails(&self.assumptions(universe), &goal)
    }

    fn fresh(&self, base: &str, extra: &[&BTreeSet<Name>]) -> Name {
        let mut avoid: BTreeSet<Name> = self.sorts.names().cloned().collect();
        for e in extra {
            avoid.extend(e.iter().cloned());
        }
        fresh_name(base, &avoid)
    }

    /// Equality of two static terms, by normalization and then the solver.
    pub fn static_eq(&mut self, a: &Static, b: &Static, u: Option<&[i64]>) -> TResult<()> {
        let a = normalize_static(a, u);
        let b = normalize_static(b, u);
        if alpha_eq_static(&a, &b) {
            return Ok(());
        }
        match (&a, &b) {
            (Static::SType(_), _) | (_, Static::SType(_)) => {
                return self.stype_eq(&SessionType::embed(a.clone()), &SessionType::embed(b.clone()), u)
            }
            (Static::Type(x), Static::Type(y)) => return self.type_rel(x, y, false),
            (Static::Lam(x, s1, b1), Static::Lam(y, s2, b2)) => {
                if s1 != s2 {
                    return Err(mismatch("binder sort", s1, s2));
                }
                let z = self.fresh(x, &[&free_vars(b1), &free_vars(b2)]);
                let b1 = subst_static(b1, &single(x, Static::Var(z.clone())));
                let b2 = subst_static(b2, &single(y, Static::Var(z.clone())));
                self.sorts.push(&z, s1.clone());
                let r = self.static_eq(&b1, &b2, u);
                self.sorts.pop();
                return r;
            }
            _ => {}
        }
        let sort = sort_of(&mut self.sorts, &a).ok();
        match sort {
            Some(Sort::Int | Sort::Bool | Sort::Set) => {
                let goal = Static::bin(Op::Eq, a.clone(), b.clone());
                let verdict = self.prove(&goal, u);
                if verdict.is_valid() {
                    Ok(())
                } else {
                    Err(Diagnostic::new(
                        "guard-unprovable",
                        format!("cannot show that `{}` equals `{}`", a, b),
                    )
                    .with_guard(&goal, &verdict))
                }
            }
            Some(Sort::SType) => self.stype_eq(&SessionType::embed(a), &SessionType::embed(b), u),
            _ => Err(mismatch("static term", &a, &b)),
        }
    }

    /// Normalizes a protocol and resolves conditionals at its head using the
    /// path assumptions. Returns the universe seen and the head.
    pub fn resolve_head(&mut self, st: &SessionType, u: Option<&[i64]>) -> TResult<(Option<Vec<i64>>, SessionType)> {
        let mut cur = normalize_stype(st, u);
        let mut universe = u.map(|v| v.to_vec());
        loop {
            if let SessionType::Within(w, body) = cur {
                universe = Some(w);
                cur = *body;
                continue;
            }
            if let SessionType::Embed(Static::Op(Op::Ite, args)) = &cur {
                let c = &args[0];
                let pick = if self.prove(c, universe.as_deref()).is_valid() {
                    Some(&args[1])
                } else if self.prove(&Static::not(c.clone()), universe.as_deref()).is_valid() {
                    Some(&args[2])
                } else {
                    None
                };
                match pick {
                    Some(s) => {
                        cur = normalize_stype(&SessionType::embed(s.clone()), universe.as_deref());
                        continue;
                    }
                    None => {
                        return Err(Diagnostic::new(
                            "protocol-head-mismatch",
                            format!("cannot decide which branch `{}` selects", c),
                        ))
                    }
                }
            }
            return Ok((universe, cur));
        }
    }

    pub fn stype_eq(&mut self, a: &SessionType, b: &SessionType, u: Option<&[i64]>) -> TResult<()> {
        let na = normalize_stype(a, u);
        let nb = normalize_stype(b, u);
        let (ua, sa) = na.strip_within();
        let (ub, sb) = nb.strip_within();
        let u2 = ua.or(ub).map(|v| v.as_slice()).or(u);
        if alpha_eq_stype(sa, sb) {
            return Ok(());
        }
        let (_, ha) = self.resolve_head(sa, u2)?;
        let (_, hb) = self.resolve_head(sb, u2)?;
        use SessionType::*;
        match (&ha, &hb) {
            (End(r1), End(r2)) => self.static_eq(r1, r2, u2),
            (
                BMsg {
                    sender: s1,
                    payload: p1,
                    cont: c1,
                },
                BMsg {
                    sender: s2,
                    payload: p2,
                    cont: c2,
                },
            ) => {
                self.static_eq(s1, s2, u2)?;
                self.type_rel(p1, p2, false)?;
                self.stype_eq(c1, c2, u2)
            }
            (
                PMsg {
                    sender: s1,
                    receiver: r1,
                    payload: p1,
                    cont: c1,
                },
                PMsg {
                    sender: s2,
                    receiver: r2,
                    payload: p2,
                    cont: c2,
                },
            ) => {
                self.static_eq(s1, s2, u2)?;
                self.static_eq(r1, r2, u2)?;
                self.type_rel(p1, p2, false)?;
                self.stype_eq(c1, c2, u2)
            }
            (Quan { role: r1, binder: b1 }, Quan { role: r2, binder: b2 }) => {
                self.static_eq(r1, r2, u2)?;
                self.static_eq(b1, b2, u2)
            }
            (
                Branch {
                    role: r1,
                    left: l1,
                    right: x1,
                },
                Branch {
                    role: r2,
                    left: l2,
                    right: x2,
                },
            ) => {
                self.static_eq(r1, r2, u2)?;
                self.stype_eq(l1, l2, u2)?;
                self.stype_eq(x1, x2, u2)
            }
            (Fix(b1), Fix(b2)) => self.static_eq(b1, b2, u2),
            (Embed(x), Embed(y)) if alpha_eq_static(x, y) => Ok(()),
            (Embed(Static::App(f1, a1)), Embed(Static::App(f2, a2))) => {
                self.static_eq(f1, f2, u2)?;
                self.static_eq(a1, a2, u2)
            }
            _ => Err(mismatch("protocol", &ha, &hb)),
        }
    }

    pub fn type_eq(&mut self, a: &LinType, b: &LinType) -> TResult<()> {
        self.type_rel(a, b, false)
    }

    /// `a` may be used where `b` is expected.
    pub fn subtype(&mut self, a: &LinType, b: &LinType) -> TResult<()> {
        self.type_rel(a, b, true)
    }

    fn type_rel(&mut self, a: &LinType, b: &LinType, sub: bool) -> TResult<()> {
        use LinType::*;
        match (a, b) {
            (Var(x), Var(y)) if x == y => Ok(()),
            (Unit, Unit) => Ok(()),
            (Base(n1, i1), Base(n2, i2)) if n1 == n2 => {
                if i1.len() == i2.len() {
                    i1.iter().zip(i2).try_for_each(|(x, y)| self.static_eq(x, y, None))
                } else if sub && i2.is_empty() {
                    Ok(())
                } else {
                    Err(mismatch("type", a, b))
                }
            }
            (Chan(r1, s1), Chan(r2, s2)) => {
                self.stype_eq(s1, s2, None)?;
                let u = universe_of(s1).or(universe_of(s2)).map(|v| v.to_vec());
                self.static_eq(r1, r2, u.as_deref())
            }
            (Pair(l1, r1, k1), Pair(l2, r2, k2)) => {
                if k1 != k2 && !(sub && !k1) {
                    return Err(mismatch("pair linearity", a, b));
                }
                self.type_rel(l1, l2, sub)?;
                self.type_rel(r1, r2, sub)
            }
            (Fun(d1, c1, k1), Fun(d2, c2, k2)) => {
                if k1 != k2 && !(sub && !k1) {
                    return Err(Diagnostic::new(
                        "type-mismatch",
                        format!("a linear function `{}` cannot be used as `{}`", a, b),
                    ));
                }
                self.type_rel(d2, d1, sub)?;
                self.type_rel(c1, c2, sub)
            }
            (Sum(l1, r1), Sum(l2, r2)) => {
                self.type_rel(l1, l2, sub)?;
                self.type_rel(r1, r2, sub)
            }
            (Guard(p1, t1), Guard(p2, t2)) | (Assert(p1, t1), Assert(p2, t2)) => {
                self.static_eq(p1, p2, None)?;
                self.type_rel(t1, t2, sub)
            }
            (Forall(x, s1, b1), Forall(y, s2, b2)) | (Exists(x, s1, b1), Exists(y, s2, b2)) => {
                if s1 != s2 || std::mem::discriminant(a) != std::mem::discriminant(b) {
                    return Err(mismatch("type", a, b));
                }
                let z = self.fresh(x, &[&free_vars_type(b1), &free_vars_type(b2)]);
                let b1 = subst_type(b1, &single(x, Static::Var(z.clone())));
                let b2 = subst_type(b2, &single(y, Static::Var(z.clone())));
                self.sorts.push(&z, s1.clone());
                let r = self.type_rel(&b1, &b2, sub);
                self.sorts.pop();
                r
            }
            _ => Err(mismatch("type", a, b)),
        }
    }
}

// ----- matching against schemes -----

pub const META_PREFIX: char = '?';

pub fn is_meta(n: &str) -> bool {
    n.starts_with(META_PREFIX)
}

fn has_meta(fv: BTreeSet<Name>) -> bool {
    fv.iter().any(|n| is_meta(n))
}

/// Progress of a match; kept separately so matching can be suspended while
/// the checker handles other arguments.
#[derive(Clone, Debug, Default)]
pub struct MatchState {
    pub vals: BTreeMap<Name, Static>,
    /// Pending `dunion(a, b) = target` equations.
    pub deferred: Vec<(Static, Static, Static)>,
    /// Equations that must be proven along with the guard.
    pub obligations: Vec<Static>,
    /// Universe of the first protocol matched.
    pub universe: Option<Vec<i64>>,
    /// Index equations the solver cannot decide become obligations instead
    /// of errors.
    pub defer_undecided: bool,
}

/// First-order matching of a scheme (whose quantified variables are
/// metavariables) against actual argument types.
pub struct Matcher<'e> {
    pub env: &'e mut TyEnv,
    pub st: MatchState,
}

impl<'e> Matcher<'e> {
    pub fn new(env: &'e mut TyEnv) -> Matcher<'e> {
        Matcher::resume(env, MatchState::default())
    }

    pub fn resume(env: &'e mut TyEnv, st: MatchState) -> Matcher<'e> {
        Matcher { env, st }
    }

    fn assigned(&self) -> StaticMap {
        self.st.vals.clone()
    }

    pub fn resolve_static(&self, s: &Static) -> Static {
        subst_static(s, &self.assigned())
    }

    pub fn resolve_type(&self, t: &LinType) -> LinType {
        subst_type(t, &self.assigned())
    }

    fn assign(&mut self, m: &str, v: Static) {
        self.st.vals.insert(m.to_string(), v);
    }

    fn cur_u(&self, u: Option<&[i64]>) -> Option<Vec<i64>> {
        u.map(|v| v.to_vec()).or_else(|| self.st.universe.clone())
    }

    pub fn match_static(&mut self, pat: &Static, act: &Static, u: Option<&[i64]>) -> TResult<()> {
        let pat = self.resolve_static(pat);
        let uu = self.cur_u(u);
        let act = normalize_static(act, uu.as_deref());
        if !has_meta(free_vars(&pat)) {
            let r = self.env.static_eq(&pat, &act, uu.as_deref());
            if r.is_err() && self.st.defer_undecided {
                let decidable = matches!(sort_of(&mut self.env.sorts, &pat), Ok(Sort::Int | Sort::Bool | Sort::Set));
                let goal = Static::bin(Op::Eq, pat.clone(), act.clone());
                if decidable && matches!(self.env.prove(&goal, uu.as_deref()), Verdict::Unknown(_)) {
                    self.st.obligations.push(goal);
                    return Ok(());
                }
            }
            return r;
        }
        match &pat {
            Static::Var(m) => {
                self.assign(m, act);
                Ok(())
            }
            Static::Op(Op::DUnion, args) => {
                self.st.deferred.push((args[0].clone(), args[1].clone(), act));
                Ok(())
            }
            Static::SType(st) => self.match_stype(st, &SessionType::embed(act), uu.as_deref()),
            Static::Type(t) => match act {
                Static::Type(a) => self.match_type(t, &a, uu.as_deref()),
                other => Err(mismatch("type", &pat, &other)),
            },
            _ => Err(mismatch("static term", &pat, &act)),
        }
    }

    pub fn match_stype(&mut self, pat: &SessionType, act: &SessionType, u: Option<&[i64]>) -> TResult<()> {
        let pat = subst_stype(pat, &self.assigned());
        if !has_meta(free_vars_stype(&pat)) {
            return self.env.stype_eq(&pat, act, u);
        }
        if let SessionType::Embed(Static::Var(m)) = &pat {
            let act = normalize_stype(act, u);
            let act = match (universe_of(&act), u) {
                (None, Some(u)) => SessionType::within(u.to_vec(), act),
                _ => act,
            };
            if self.st.universe.is_none() {
                self.st.universe = universe_of(&act).map(|v| v.to_vec());
            }
            self.assign(m, Static::stype(act));
            return Ok(());
        }
        let (u2, head) = self.env.resolve_head(act, u)?;
        if self.st.universe.is_none() {
            self.st.universe = u2.clone();
        }
        let u = u2.as_deref();
        use SessionType::*;
        match (&pat, &head) {
            (End(r1), End(r2)) => self.match_static(r1, r2, u),
            (
                BMsg {
                    sender: s1,
                    payload: p1,
                    cont: c1,
                },
                BMsg {
                    sender: s2,
                    payload: p2,
                    cont: c2,
                },
            ) => {
                self.match_static(s1, s2, u)?;
                self.match_type(p1, p2, u)?;
                self.match_stype(c1, c2, u)
            }
            (
                PMsg {
                    sender: s1,
                    receiver: r1,
                    payload: p1,
                    cont: c1,
                },
                PMsg {
                    sender: s2,
                    receiver: r2,
                    payload: p2,
                    cont: c2,
                },
            ) => {
                self.match_static(s1, s2, u)?;
                self.match_static(r1, r2, u)?;
                self.match_type(p1, p2, u)?;
                self.match_stype(c1, c2, u)
            }
            (Quan { role: r1, binder: b1 }, Quan { role: r2, binder: b2 }) => {
                self.match_static(r1, r2, u)?;
                self.match_static(b1, b2, u)
            }
            (
                Branch {
                    role: r1,
                    left: l1,
                    right: x1,
                },
                Branch {
                    role: r2,
                    left: l2,
                    right: x2,
                },
            ) => {
                self.match_static(r1, r2, u)?;
                self.match_stype(l1, l2, u)?;
                self.match_stype(x1, x2, u)
            }
            (Fix(b1), Fix(b2)) => self.match_static(b1, b2, u),
            _ => Err(Diagnostic::new(
                "protocol-head-mismatch",
                format!(
                    "the protocol `{1}` starts with {0} but the call expects {2}",
                    head_name(&head),
                    head,
                    head_name(&pat)
                ),
            )),
        }
    }

    /// Matches an argument pattern against the argument's actual type; the
    /// actual type may be a subtype of the instantiated pattern.
    pub fn match_type(&mut self, pat: &LinType, act: &LinType, u: Option<&[i64]>) -> TResult<()> {
        let pat = self.resolve_type(pat);
        use LinType::*;
        if !has_meta(free_vars_type(&pat)) {
            // indices go through `match_static` so undecided ones can be deferred
            if let (true, Base(n, idx), Base(n2, idx2)) = (self.st.defer_undecided, &pat, act) {
                if n == n2 && idx.len() == idx2.len() {
                    return idx.iter().zip(idx2).try_for_each(|(p, a)| self.match_static(p, a, u));
                }
            }
            return self.env.subtype(act, &pat);
        }
        match (&pat, act) {
            (Var(m), _) if is_meta(m) => {
                self.assign(m, Static::ty(act.clone()));
                Ok(())
            }
            (Chan(rs, st), Chan(rs2, st2)) => {
                self.match_stype(st, st2, u)?;
                let cu = universe_of(st2).map(|v| v.to_vec()).or_else(|| self.cur_u(u));
                self.match_static(rs, rs2, cu.as_deref())
            }
            (Fun(d, c, k), Fun(d2, c2, k2)) => {
                if *k2 && !*k {
                    return Err(Diagnostic::new(
                        "type-mismatch",
                        format!("a linear function `{}` cannot be used as `{}`", act, pat),
                    ));
                }
                self.match_type(d, d2, u)?;
                self.match_type(c, c2, u)
            }
            (Pair(l, r, _), Pair(l2, r2, _)) | (Sum(l, r), Sum(l2, r2)) => {
                self.match_type(l, l2, u)?;
                self.match_type(r, r2, u)
            }
            (Base(n, idx), Base(n2, idx2)) if n == n2 => {
                if idx.len() != idx2.len() {
                    return Err(Diagnostic::new(
                        "type-mismatch",
                        format!("`{}` needs a statically indexed `{}`, found `{}`", pat, n, act),
                    ));
                }
                idx.iter().zip(idx2).try_for_each(|(p, a)| self.match_static(p, a, u))
            }
            (Chan(..), _) => Err(Diagnostic::new(
                "type-mismatch",
                format!("expected an endpoint of type `{}`, found `{}`", pat, act),
            )),
            _ => Err(mismatch("type", &pat, act)),
        }
    }

    /// Solves pending `dunion(a, b) = t` equations in which `t` and one side
    /// are known; each solved equation becomes a proof obligation.
    pub fn solve_deferred(&mut self) {
        let mut progress = true;
        while progress {
            progress = false;
            let pending = std::mem::take(&mut self.st.deferred);
            for (a, b, t) in pending {
                let (a, b, t) = (self.resolve_static(&a), self.resolve_static(&b), self.resolve_static(&t));
                let known = |s: &Static| !has_meta(free_vars(s));
                let u = self.st.universe.clone();
                let solved = match (&a, &b) {
                    (Static::Var(m), _) if is_meta(m) && known(&b) && known(&t) => {
                        Some((m.clone(), Static::bin(Op::Minus, t.clone(), b.clone())))
                    }
                    (_, Static::Var(m)) if is_meta(m) && known(&a) && known(&t) => {
                        Some((m.clone(), Static::bin(Op::Minus, t.clone(), a.clone())))
                    }
                    _ => None,
                };
                match solved {
                    Some((m, v)) => {
                        self.assign(&m, normalize_static(&v, u.as_deref()));
                        self.st.obligations.push(Static::bin(
                            Op::Eq,
                            Static::bin(Op::DUnion, a.clone(), b.clone()),
                            t.clone(),
                        ));
                        progress = true;
                    }
                    None if known(&a) && known(&b) && known(&t) => {
                        self.st.obligations.push(Static::bin(Op::Eq, Static::bin(Op::DUnion, a, b), t));
                    }
                    None => self.st.deferred.push((a, b, t)),
                }
            }
        }
    }
}
