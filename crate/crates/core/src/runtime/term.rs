//! Closed-term reduction for a single thread: substitution, redex search and
//! contraction of the pure redexes.

use std::collections::BTreeMap;

use crate::statics::{single, subst_term_statics};
use crate::syntax::ast::*;

/// Why a thread cannot take a local step.
#[derive(Clone, Debug, PartialEq)]
pub enum Stuck {
    /// The thread is a value.
    Value,
    /// The redex is a session API call, which only the pool can reduce.
    /// `endpoint` is the endpoint in its first argument, when it has one.
    Blocked { api: ApiName, endpoint: Option<Endpoint> },
    /// No rule applies; never expected for well-typed threads.
    Genuine(String),
}

/// Removes source position markers.
pub fn strip_spans(e: &DynTerm) -> DynTerm {
    map_children(e, &mut |c| strip_spans(c)).strip_at_owned()
}

trait StripOwned {
    fn strip_at_owned(self) -> DynTerm;
}

impl StripOwned for DynTerm {
    fn strip_at_owned(self) -> DynTerm {
        match self {
            DynTerm::At(_, inner) => inner.strip_at_owned(),
            other => other,
        }
    }
}

/// Rebuilds `e` with `f` applied to every immediate subterm.
fn map_children(e: &DynTerm, f: &mut dyn FnMut(&DynTerm) -> DynTerm) -> DynTerm {
    let mut out = e.clone();
    for i in 0..child_count(e) {
        let new = f(child(e, i));
        *child_mut(&mut out, i) = new;
    }
    out
}

fn child_count(e: &DynTerm) -> usize {
    e.children().len()
}

fn child(e: &DynTerm, i: usize) -> &DynTerm {
    e.children()[i]
}

/// Mutable access to the `i`-th immediate subterm, in the order of
/// [`DynTerm::children`].
fn child_mut(e: &mut DynTerm, i: usize) -> &mut DynTerm {
    match (e, i) {
        (DynTerm::Lam { body, .. } | DynTerm::Fix { body, .. }, 0) => body,
        (DynTerm::App(a, _) | DynTerm::Pair(a, _), 0) => a,
        (DynTerm::App(_, b) | DynTerm::Pair(_, b), 1) => b,
        (DynTerm::Fst(a) | DynTerm::Snd(a), 0) => a,
        (
            DynTerm::LetPair { bound, .. } | DynTerm::LetAssert { bound, .. } | DynTerm::LetExists { bound, .. },
            0,
        ) => bound,
        (
            DynTerm::LetPair { body, .. } | DynTerm::LetAssert { body, .. } | DynTerm::LetExists { body, .. },
            1,
        ) => body,
        (DynTerm::If(a, _, _), 0) => a,
        (DynTerm::If(_, b, _), 1) => b,
        (DynTerm::If(_, _, c), 2) => c,
        (DynTerm::Inj { body, .. }, 0) => body,
        (DynTerm::Case { scrut, .. }, 0) => scrut,
        (DynTerm::Case { left, .. }, 1) => &mut left.1,
        (DynTerm::Case { right, .. }, 2) => &mut right.1,
        (
            DynTerm::GuardIntro(a)
            | DynTerm::GuardElim(a)
            | DynTerm::AssertIntro(a)
            | DynTerm::Ascribe(a, _)
            | DynTerm::At(_, a),
            0,
        ) => a,
        (
            DynTerm::ForallIntro { body, .. } | DynTerm::ForallElim { body, .. } | DynTerm::ExistsIntro { body, .. },
            0,
        ) => body,
        (DynTerm::ApiCall { args, .. } | DynTerm::Prim(_, args), i) => &mut args[i],
        (e, i) => panic!("term `{}` has no child {}", e, i),
    }
}

/// Indices of the subterms evaluated before `e` itself, left to right.
fn eval_children(e: &DynTerm) -> Vec<usize> {
    match e {
        DynTerm::App(..) | DynTerm::Pair(..) => vec![0, 1],
        DynTerm::Fst(_)
        | DynTerm::Snd(_)
        | DynTerm::LetPair { .. }
        | DynTerm::LetAssert { .. }
        | DynTerm::LetExists { .. }
        | DynTerm::If(..)
        | DynTerm::Inj { .. }
        | DynTerm::Case { .. }
        | DynTerm::GuardIntro(_)
        | DynTerm::GuardElim(_)
        | DynTerm::AssertIntro(_)
        | DynTerm::Ascribe(..)
        | DynTerm::At(..)
        | DynTerm::ForallIntro { .. }
        | DynTerm::ForallElim { .. }
        | DynTerm::ExistsIntro { .. } => vec![0],
        DynTerm::ApiCall { args, .. } | DynTerm::Prim(_, args) => (0..args.len()).collect(),
        _ => vec![],
    }
}

/// Looks through ascriptions and position markers.
pub fn peel(v: &DynTerm) -> &DynTerm {
    let mut cur = v;
    loop {
        match cur {
            DynTerm::Ascribe(inner, _) | DynTerm::At(_, inner) => cur = inner,
            _ => return cur,
        }
    }
}

/// `unify(v)` directly under its `forall-` instantiation is reduced as one
/// redex, so the witness travels with the partial redex.
pub(crate) fn is_unify_redex(e: &DynTerm) -> bool {
    match e {
        DynTerm::ForallElim { body, .. } => matches!(
            peel(body),
            DynTerm::ApiCall { api: ApiName::Unify, args, .. } if args.iter().all(DynTerm::is_value)
        ),
        _ => false,
    }
}

/// Path to the leftmost-innermost redex under call-by-value; `None` for values.
pub fn redex_path(e: &DynTerm) -> Option<Vec<usize>> {
    if e.is_value() {
        return None;
    }
    if is_unify_redex(e) {
        return Some(vec![]);
    }
    for i in eval_children(e) {
        let c = child(e, i);
        if !c.is_value() {
            let mut p = vec![i];
            p.extend(redex_path(c)?);
            return Some(p);
        }
    }
    Some(vec![])
}

pub fn at_path<'a>(e: &'a DynTerm, path: &[usize]) -> &'a DynTerm {
    path.iter().fold(e, |cur, &i| child(cur, i))
}

pub fn at_path_mut<'a>(e: &'a mut DynTerm, path: &[usize]) -> &'a mut DynTerm {
    let mut cur = e;
    for &i in path {
        cur = child_mut(cur, i);
    }
    cur
}

/// Replaces free occurrences of the dynamic variable `x` by the closed value `v`.
pub fn subst_var(e: &DynTerm, x: &str, v: &DynTerm) -> DynTerm {
    let mut map = BTreeMap::new();
    map.insert(x.to_string(), v.clone());
    subst_vars(e, &map)
}

/// Simultaneous substitution of closed terms for dynamic variables.
pub fn subst_vars(e: &DynTerm, map: &BTreeMap<Name, DynTerm>) -> DynTerm {
    if map.is_empty() {
        return e.clone();
    }
    let without = |names: &[&Name]| {
        let mut m = map.clone();
        for n in names {
            m.remove(*n);
        }
        m
    };
    match e {
        DynTerm::Var(y) => map.get(y).cloned().unwrap_or_else(|| e.clone()),
        DynTerm::Lam { param, ann, body } => DynTerm::Lam {
            param: param.clone(),
            ann: ann.clone(),
            body: Box::new(subst_vars(body, &without(&[param]))),
        },
        DynTerm::Fix {
            name,
            param,
            dom,
            cod,
            body,
        } => DynTerm::Fix {
            name: name.clone(),
            param: param.clone(),
            dom: dom.clone(),
            cod: cod.clone(),
            body: Box::new(subst_vars(body, &without(&[name, param]))),
        },
        DynTerm::LetPair {
            left,
            right,
            bound,
            body,
        } => DynTerm::LetPair {
            left: left.clone(),
            right: right.clone(),
            bound: Box::new(subst_vars(bound, map)),
            body: Box::new(subst_vars(body, &without(&[left, right]))),
        },
        DynTerm::Case { scrut, left, right } => DynTerm::Case {
            scrut: Box::new(subst_vars(scrut, map)),
            left: (left.0.clone(), Box::new(subst_vars(&left.1, &without(&[&left.0])))),
            right: (right.0.clone(), Box::new(subst_vars(&right.1, &without(&[&right.0])))),
        },
        DynTerm::LetAssert { var, bound, body } => DynTerm::LetAssert {
            var: var.clone(),
            bound: Box::new(subst_vars(bound, map)),
            body: Box::new(subst_vars(body, &without(&[var]))),
        },
        DynTerm::LetExists {
            svar,
            var,
            bound,
            body,
        } => DynTerm::LetExists {
            svar: svar.clone(),
            var: var.clone(),
            bound: Box::new(subst_vars(bound, map)),
            body: Box::new(subst_vars(body, &without(&[var]))),
        },
        _ => map_children(e, &mut |c| subst_vars(c, map)),
    }
}

/// Result of contracting the redex found by [`redex_path`].
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Contraction {
    Reduced(DynTerm),
    Stuck(Stuck),
}

fn genuine(msg: impl Into<String>) -> Contraction {
    Contraction::Stuck(Stuck::Genuine(msg.into()))
}

fn lit_int(v: &DynTerm) -> Option<i64> {
    match peel(v) {
        DynTerm::Lit(Lit::Int(i)) => Some(*i),
        _ => None,
    }
}

fn lit_bool(v: &DynTerm) -> Option<bool> {
    match peel(v) {
        DynTerm::Lit(Lit::Bool(b)) => Some(*b),
        _ => None,
    }
}

fn prim(op: PrimOp, args: &[DynTerm]) -> Option<Lit> {
    let int = |i: usize| args.get(i).and_then(lit_int);
    Some(match op {
        PrimOp::Add => Lit::Int(int(0)?.checked_add(int(1)?)?),
        PrimOp::Sub => Lit::Int(int(0)?.checked_sub(int(1)?)?),
        PrimOp::Mul => Lit::Int(int(0)?.checked_mul(int(1)?)?),
        PrimOp::Div => Lit::Int(int(0)?.checked_div_euclid(int(1)?)?),
        PrimOp::Lt => Lit::Bool(int(0)? < int(1)?),
        PrimOp::Le => Lit::Bool(int(0)? <= int(1)?),
        PrimOp::Eq | PrimOp::Neq => {
            let same = match (int(0), int(1)) {
                (Some(a), Some(b)) => a == b,
                _ => lit_bool(&args[0])? == lit_bool(&args[1])?,
            };
            Lit::Bool(same == (op == PrimOp::Eq))
        }
        PrimOp::Not => Lit::Bool(!lit_bool(&args[0])?),
    })
}

/// The endpoint in the first argument of an API call, if any.
pub fn first_endpoint(args: &[DynTerm]) -> Option<Endpoint> {
    match args.first().map(peel) {
        Some(DynTerm::Endpoint(ep)) => Some(ep.clone()),
        _ => None,
    }
}

/// Contracts a redex whose evaluated subterms are already values.
pub(crate) fn contract(e: &DynTerm) -> Contraction {
    use Contraction::Reduced;
    match e {
        DynTerm::App(f, a) => match peel(f) {
            DynTerm::Lam { param, body, .. } => Reduced(subst_var(body, param, a)),
            fix @ DynTerm::Fix { name, param, body, .. } => {
                let mut m = BTreeMap::new();
                m.insert(name.clone(), fix.clone());
                m.insert(param.clone(), (**a).clone());
                Reduced(subst_vars(body, &m))
            }
            other => genuine(format!("applying the non-function `{}`", other)),
        },
        DynTerm::Fst(p) | DynTerm::Snd(p) => match peel(p) {
            DynTerm::Pair(l, r) => Reduced(if matches!(e, DynTerm::Fst(_)) { (**l).clone() } else { (**r).clone() }),
            other => genuine(format!("projecting from the non-pair `{}`", other)),
        },
        DynTerm::LetPair {
            left,
            right,
            bound,
            body,
        } => match peel(bound) {
            DynTerm::Pair(l, r) => {
                let mut m = BTreeMap::new();
                m.insert(left.clone(), (**l).clone());
                m.insert(right.clone(), (**r).clone());
                Reduced(subst_vars(body, &m))
            }
            other => genuine(format!("destructuring the non-pair `{}`", other)),
        },
        DynTerm::If(c, t, f) => match lit_bool(c) {
            Some(true) => Reduced((**t).clone()),
            Some(false) => Reduced((**f).clone()),
            None => genuine(format!("`if` on the non-boolean `{}`", c)),
        },
        DynTerm::Case { scrut, left, right } => match peel(scrut) {
            DynTerm::Inj { right: r, body } => {
                let (x, arm) = if *r { right } else { left };
                Reduced(subst_var(arm, x, body))
            }
            other => genuine(format!("`case` on the non-injection `{}`", other)),
        },
        DynTerm::GuardElim(g) => match peel(g) {
            DynTerm::GuardIntro(v) => Reduced((**v).clone()),
            other => genuine(format!("guard elimination on `{}`", other)),
        },
        DynTerm::LetAssert { var, bound, body } => match peel(bound) {
            DynTerm::AssertIntro(v) => Reduced(subst_var(body, var, v)),
            other => genuine(format!("assertion elimination on `{}`", other)),
        },
        DynTerm::ForallElim { body, arg } => {
            if is_unify_redex(e) {
                let DynTerm::ApiCall { args, .. } = peel(body) else { unreachable!() };
                return Contraction::Stuck(Stuck::Blocked {
                    api: ApiName::Unify,
                    endpoint: first_endpoint(args),
                });
            }
            match peel(body) {
                DynTerm::ForallIntro { var: Some((a, _)), body: v } => match arg {
                    Some(w) => Reduced(subst_term_statics(v, &single(a, w.clone()))),
                    None => genuine("universal instantiation without a witness"),
                },
                DynTerm::ForallIntro { var: None, body: v } => Reduced((**v).clone()),
                other => genuine(format!("instantiating the non-universal `{}`", other)),
            }
        }
        DynTerm::LetExists {
            svar,
            var,
            bound,
            body,
        } => match peel(bound) {
            DynTerm::ExistsIntro { body: v, witness, .. } => {
                let body = match (svar, witness) {
                    (Some(z), Some(w)) => subst_term_statics(body, &single(z, w.clone())),
                    _ => (**body).clone(),
                };
                Reduced(subst_var(&body, var, v))
            }
            other => genuine(format!("opening the non-package `{}`", other)),
        },
        DynTerm::Prim(op, args) => match prim(*op, args) {
            Some(l) => Reduced(DynTerm::Lit(l)),
            None => genuine(format!("primitive `{}` undefined on its arguments", op.as_str())),
        },
        DynTerm::ApiCall { api, args, .. } => Contraction::Stuck(Stuck::Blocked {
            api: *api,
            endpoint: first_endpoint(args),
        }),
        DynTerm::Var(x) => genuine(format!("free variable `{}`", x)),
        other => genuine(format!("no reduction applies to `{}`", other)),
    }
}

/// One leftmost call-by-value step of a closed term.
pub fn step_thread(e: &DynTerm) -> Result<DynTerm, Stuck> {
    let path = redex_path(e).ok_or(Stuck::Value)?;
    match contract(at_path(e, &path)) {
        Contraction::Reduced(r) => {
            let mut out = e.clone();
            *at_path_mut(&mut out, &path) = r;
            Ok(out)
        }
        Contraction::Stuck(s) => Err(s),
    }
}

/// Evaluates locally until the thread is a value or stuck; at most `fuel` steps.
pub fn eval_local(e: &DynTerm, fuel: usize) -> (DynTerm, Stuck) {
    let mut cur = e.clone();
    for _ in 0..fuel {
        match step_thread(&cur) {
            Ok(next) => cur = next,
            Err(s) => return (cur, s),
        }
    }
    (cur, Stuck::Genuine(format!("no value after {} local steps", fuel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;

    fn ep(c: u64, roles: &[i64]) -> DynTerm {
        DynTerm::Endpoint(Endpoint::new(ChannelId(c), roles.to_vec()))
    }

    #[test]
    fn beta() {
        let e = DynTerm::app(DynTerm::lam("x", None, DynTerm::var("x")), DynTerm::Unit);
        assert_eq!(step_thread(&e), Ok(DynTerm::Unit));
    }

    #[test]
    fn guard_elimination() {
        let e = DynTerm::GuardElim(Box::new(DynTerm::GuardIntro(Box::new(DynTerm::Unit))));
        assert_eq!(step_thread(&e), Ok(DynTerm::Unit));
    }

    #[test]
    fn api_call_blocks() {
        let e = DynTerm::api(ApiName::BSend, vec![ep(0, &[0]), DynTerm::Unit]);
        assert_eq!(
            step_thread(&e),
            Err(Stuck::Blocked {
                api: ApiName::BSend,
                endpoint: Some(Endpoint::new(ChannelId(0), vec![0]))
            })
        );
    }

    #[test]
    fn values_do_not_step() {
        assert_eq!(step_thread(&DynTerm::Unit), Err(Stuck::Value));
        assert_eq!(step_thread(&ep(1, &[0, 1])), Err(Stuck::Value));
    }

    #[test]
    fn arithmetic_and_conditionals() {
        let e = strip_spans(&parse_expr("if lt(add(1, 2), 4) then mul(2, 3) else 0").unwrap());
        let (v, s) = eval_local(&e, 100);
        assert_eq!(s, Stuck::Value);
        assert_eq!(v, DynTerm::Lit(Lit::Int(6)));
    }

    #[test]
    fn recursion_unrolls() {
        let src = "(fix f(n: int): int => if le(n, 0) then 0 else add(n, f(sub(n, 1))))(4)";
        let (v, s) = eval_local(&strip_spans(&parse_expr(src).unwrap()), 1000);
        assert_eq!(s, Stuck::Value);
        assert_eq!(v, DynTerm::Lit(Lit::Int(10)));
    }

    #[test]
    fn substitution_respects_shadowing() {
        let e = strip_spans(&parse_expr("lam x => (x, y)").unwrap());
        let out = subst_var(&e, "x", &DynTerm::Unit);
        assert_eq!(out, e);
        let out = subst_var(&e, "y", &DynTerm::Unit);
        assert_eq!(out, strip_spans(&parse_expr("lam x => (x, ())").unwrap()));
    }
}
