//! Free variables, capture-avoiding substitution and alpha-equivalence for
//! static terms, session types and types.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::ast::*;

pub type StaticMap = BTreeMap<Name, Static>;

pub fn free_vars(s: &Static) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fv_static(s, &mut vec![], &mut out);
    out
}

pub fn free_vars_type(t: &LinType) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fv_type(t, &mut vec![], &mut out);
    out
}

pub fn free_vars_stype(st: &SessionType) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fv_stype(st, &mut vec![], &mut out);
    out
}

fn fv_static(s: &Static, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match s {
        Static::Var(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        Static::Int(_) | Static::Bool(_) | Static::Set(_) | Static::Full => {}
        Static::Op(_, args) => args.iter().for_each(|a| fv_static(a, bound, out)),
        Static::Lam(a, _, body) => {
            bound.push(a.clone());
            fv_static(body, bound, out);
            bound.pop();
        }
        Static::App(f, a) => {
            fv_static(f, bound, out);
            fv_static(a, bound, out);
        }
        Static::SType(st) => fv_stype(st, bound, out),
        Static::Type(t) => fv_type(t, bound, out),
    }
}

fn fv_stype(st: &SessionType, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match st {
        SessionType::End(r) => fv_static(r, bound, out),
        SessionType::BMsg { sender, payload, cont } => {
            fv_static(sender, bound, out);
            fv_type(payload, bound, out);
            fv_stype(cont, bound, out);
        }
        SessionType::PMsg {
            sender,
            receiver,
            payload,
            cont,
        } => {
            fv_static(sender, bound, out);
            fv_static(receiver, bound, out);
            fv_type(payload, bound, out);
            fv_stype(cont, bound, out);
        }
        SessionType::Quan { role, binder } => {
            fv_static(role, bound, out);
            fv_static(binder, bound, out);
        }
        SessionType::Branch { role, left, right } => {
            fv_static(role, bound, out);
            fv_stype(left, bound, out);
            fv_stype(right, bound, out);
        }
        SessionType::Fix(b) => fv_static(b, bound, out),
        SessionType::Within(_, body) => fv_stype(body, bound, out),
        SessionType::Embed(s) => fv_static(s, bound, out),
    }
}

fn fv_type(t: &LinType, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        LinType::Var(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        LinType::Unit => {}
        LinType::Base(_, idx) => idx.iter().for_each(|s| fv_static(s, bound, out)),
        LinType::Chan(rs, st) => {
            fv_static(rs, bound, out);
            fv_stype(st, bound, out);
        }
        LinType::Pair(l, r, _) | LinType::Fun(l, r, _) | LinType::Sum(l, r) => {
            fv_type(l, bound, out);
            fv_type(r, bound, out);
        }
        LinType::Guard(p, t) | LinType::Assert(p, t) => {
            fv_static(p, bound, out);
            fv_type(t, bound, out);
        }
        LinType::Forall(a, _, body) | LinType::Exists(a, _, body) => {
            bound.push(a.clone());
            fv_type(body, bound, out);
            bound.pop();
        }
    }
}

/// A name based on `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{}_{}", stem, i))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

fn map_fv(map: &StaticMap) -> BTreeSet<Name> {
    let mut out: BTreeSet<Name> = map.keys().cloned().collect();
    for v in map.values() {
        out.extend(free_vars(v));
    }
    out
}

/// Renames the binder `a` if it would capture a free variable of the
/// substitution; returns the binder to use and the map for the body.
fn enter_binder(a: &Name, map: &StaticMap, body_fv: impl FnOnce() -> BTreeSet<Name>) -> (Name, StaticMap) {
    let mut inner = map.clone();
    inner.remove(a);
    let captures = inner.values().any(|v| free_vars(v).contains(a));
    if !captures {
        return (a.clone(), inner);
    }
    let mut avoid = map_fv(&inner);
    avoid.extend(body_fv());
    let fresh = fresh_name(a, &avoid);
    inner.insert(a.clone(), Static::Var(fresh.clone()));
    (fresh, inner)
}

pub fn subst_static(s: &Static, map: &StaticMap) -> Static {
    if map.is_empty() {
        return s.clone();
    }
    match s {
        Static::Var(n) => map.get(n).cloned().unwrap_or_else(|| s.clone()),
        Static::Int(_) | Static::Bool(_) | Static::Set(_) | Static::Full => s.clone(),
        Static::Op(op, args) => Static::Op(*op, args.iter().map(|a| subst_static(a, map)).collect()),
        Static::Lam(a, sort, body) => {
            let (a2, inner) = enter_binder(a, map, || free_vars(body));
            Static::Lam(a2, sort.clone(), Box::new(subst_static(body, &inner)))
        }
        Static::App(f, a) => Static::app(subst_static(f, map), subst_static(a, map)),
        Static::SType(st) => Static::stype(subst_stype(st, map)),
        Static::Type(t) => Static::ty(subst_type(t, map)),
    }
}

pub fn subst_stype(st: &SessionType, map: &StaticMap) -> SessionType {
    if map.is_empty() {
        return st.clone();
    }
    match st {
        SessionType::End(r) => SessionType::End(subst_static(r, map)),
        SessionType::BMsg { sender, payload, cont } => SessionType::bmsg(
            subst_static(sender, map),
            subst_type(payload, map),
            subst_stype(cont, map),
        ),
        SessionType::PMsg {
            sender,
            receiver,
            payload,
            cont,
        } => SessionType::pmsg(
            subst_static(sender, map),
            subst_static(receiver, map),
            subst_type(payload, map),
            subst_stype(cont, map),
        ),
        SessionType::Quan { role, binder } => SessionType::Quan {
            role: subst_static(role, map),
            binder: subst_static(binder, map),
        },
        SessionType::Branch { role, left, right } => SessionType::Branch {
            role: subst_static(role, map),
            left: Box::new(subst_stype(left, map)),
            right: Box::new(subst_stype(right, map)),
        },
        SessionType::Fix(b) => SessionType::Fix(subst_static(b, map)),
        SessionType::Within(u, body) => SessionType::Within(u.clone(), Box::new(subst_stype(body, map))),
        SessionType::Embed(s) => SessionType::embed(subst_static(s, map)),
    }
}

pub fn subst_type(t: &LinType, map: &StaticMap) -> LinType {
    if map.is_empty() {
        return t.clone();
    }
    match t {
        LinType::Var(n) => match map.get(n) {
            Some(Static::Type(inner)) => (**inner).clone(),
            Some(Static::Var(m)) => LinType::Var(m.clone()),
            _ => t.clone(),
        },
        LinType::Unit => LinType::Unit,
        LinType::Base(n, idx) => LinType::Base(n.clone(), idx.iter().map(|s| subst_static(s, map)).collect()),
        LinType::Chan(rs, st) => LinType::chan(subst_static(rs, map), subst_stype(st, map)),
        LinType::Pair(l, r, lin) => LinType::pair(subst_type(l, map), subst_type(r, map), *lin),
        LinType::Fun(l, r, lin) => LinType::fun(subst_type(l, map), subst_type(r, map), *lin),
        LinType::Sum(l, r) => LinType::sum(subst_type(l, map), subst_type(r, map)),
        LinType::Guard(p, t) => LinType::Guard(subst_static(p, map), Box::new(subst_type(t, map))),
        LinType::Assert(p, t) => LinType::Assert(subst_static(p, map), Box::new(subst_type(t, map))),
        LinType::Forall(a, s, body) | LinType::Exists(a, s, body) => {
            let (a2, inner) = enter_binder(a, map, || free_vars_type(body));
            let body = Box::new(subst_type(body, &inner));
            if matches!(t, LinType::Forall(..)) {
                LinType::Forall(a2, s.clone(), body)
            } else {
                LinType::Exists(a2, s.clone(), body)
            }
        }
    }
}

pub fn single(name: &str, value: Static) -> StaticMap {
    let mut m = StaticMap::new();
    m.insert(name.to_string(), value);
    m
}

/// Substitutes static variables inside a dynamic term (annotations, static
/// arguments and guards). Static binders in the term shadow the map.
pub fn subst_term_statics(t: &DynTerm, map: &StaticMap) -> DynTerm {
    if map.is_empty() {
        return t.clone();
    }
    let st = |s: &Static| subst_static(s, map);
    let ty = |x: &LinType| subst_type(x, map);
    let rec = |x: &DynTerm| Box::new(subst_term_statics(x, map));
    match t {
        DynTerm::Var(_) | DynTerm::Unit | DynTerm::Lit(_) | DynTerm::Endpoint(_) => t.clone(),
        DynTerm::Lam { param, ann, body } => DynTerm::Lam {
            param: param.clone(),
            ann: ann.as_ref().map(ty),
            body: rec(body),
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
            dom: ty(dom),
            cod: ty(cod),
            body: rec(body),
        },
        DynTerm::App(a, b) => DynTerm::App(rec(a), rec(b)),
        DynTerm::Pair(a, b) => DynTerm::Pair(rec(a), rec(b)),
        DynTerm::Fst(a) => DynTerm::Fst(rec(a)),
        DynTerm::Snd(a) => DynTerm::Snd(rec(a)),
        DynTerm::LetPair {
            left,
            right,
            bound,
            body,
        } => DynTerm::LetPair {
            left: left.clone(),
            right: right.clone(),
            bound: rec(bound),
            body: rec(body),
        },
        DynTerm::If(a, b, c) => DynTerm::If(rec(a), rec(b), rec(c)),
        DynTerm::Inj { right, body } => DynTerm::Inj {
            right: *right,
            body: rec(body),
        },
        DynTerm::Case { scrut, left, right } => DynTerm::Case {
            scrut: rec(scrut),
            left: (left.0.clone(), rec(&left.1)),
            right: (right.0.clone(), rec(&right.1)),
        },
        DynTerm::GuardIntro(a) => DynTerm::GuardIntro(rec(a)),
        DynTerm::GuardElim(a) => DynTerm::GuardElim(rec(a)),
        DynTerm::AssertIntro(a) => DynTerm::AssertIntro(rec(a)),
        DynTerm::LetAssert { var, bound, body } => DynTerm::LetAssert {
            var: var.clone(),
            bound: rec(bound),
            body: rec(body),
        },
        DynTerm::ForallIntro { var, body } => {
            let inner = shadow(map, var.as_ref().map(|v| &v.0));
            DynTerm::ForallIntro {
                var: var.clone(),
                body: Box::new(subst_term_statics(body, &inner)),
            }
        }
        DynTerm::ForallElim { body, arg } => DynTerm::ForallElim {
            body: rec(body),
            arg: arg.as_ref().map(st),
        },
        DynTerm::ExistsIntro { body, witness, ann } => DynTerm::ExistsIntro {
            body: rec(body),
            witness: witness.as_ref().map(st),
            ann: ann.as_ref().map(ty),
        },
        DynTerm::LetExists {
            svar,
            var,
            bound,
            body,
        } => {
            let inner = shadow(map, svar.as_ref());
            DynTerm::LetExists {
                svar: svar.clone(),
                var: var.clone(),
                bound: rec(bound),
                body: Box::new(subst_term_statics(body, &inner)),
            }
        }
        DynTerm::Ascribe(a, t2) => DynTerm::Ascribe(rec(a), ty(t2)),
        DynTerm::ApiCall {
            api,
            statics,
            args,
            runtime_guard,
        } => DynTerm::ApiCall {
            api: *api,
            statics: statics.iter().map(st).collect(),
            args: args.iter().map(|a| subst_term_statics(a, map)).collect(),
            runtime_guard: runtime_guard.as_ref().map(st),
        },
        DynTerm::Prim(op, args) => DynTerm::Prim(*op, args.iter().map(|a| subst_term_statics(a, map)).collect()),
        DynTerm::At(sp, a) => DynTerm::At(*sp, rec(a)),
    }
}

fn shadow(map: &StaticMap, name: Option<&Name>) -> StaticMap {
    let mut inner = map.clone();
    if let Some(n) = name {
        inner.remove(n);
    }
    inner
}

// ----- alpha-equivalence -----

type Pairs = Vec<(Name, Name)>;

fn var_eq(a: &str, b: &str, env: &Pairs) -> bool {
    for (x, y) in env.iter().rev() {
        if x == a || y == b {
            return x == a && y == b;
        }
    }
    a == b
}

pub fn alpha_eq_static(a: &Static, b: &Static) -> bool {
    aeq_static(a, b, &mut vec![])
}

pub fn alpha_eq_stype(a: &SessionType, b: &SessionType) -> bool {
    aeq_stype(a, b, &mut vec![])
}

pub fn alpha_eq_type(a: &LinType, b: &LinType) -> bool {
    aeq_type(a, b, &mut vec![])
}

fn aeq_static(a: &Static, b: &Static, env: &mut Pairs) -> bool {
    match (a, b) {
        (Static::Var(x), Static::Var(y)) => var_eq(x, y, env),
        (Static::Op(o1, a1), Static::Op(o2, a2)) => {
            o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| aeq_static(x, y, env))
        }
        (Static::Lam(x, s1, b1), Static::Lam(y, s2, b2)) => {
            if s1 != s2 {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = aeq_static(b1, b2, env);
            env.pop();
            r
        }
        (Static::App(f1, a1), Static::App(f2, a2)) => aeq_static(f1, f2, env) && aeq_static(a1, a2, env),
        (Static::SType(s1), Static::SType(s2)) => aeq_stype(s1, s2, env),
        (Static::Type(t1), Static::Type(t2)) => aeq_type(t1, t2, env),
        _ => a == b,
    }
}

fn aeq_stype(a: &SessionType, b: &SessionType, env: &mut Pairs) -> bool {
    use SessionType::*;
    match (a, b) {
        (End(r1), End(r2)) => aeq_static(r1, r2, env),
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
        ) => aeq_static(s1, s2, env) && aeq_type(p1, p2, env) && aeq_stype(c1, c2, env),
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
            aeq_static(s1, s2, env)
                && aeq_static(r1, r2, env)
                && aeq_type(p1, p2, env)
                && aeq_stype(c1, c2, env)
        }
        (Quan { role: r1, binder: b1 }, Quan { role: r2, binder: b2 }) => {
            aeq_static(r1, r2, env) && aeq_static(b1, b2, env)
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
        ) => aeq_static(r1, r2, env) && aeq_stype(l1, l2, env) && aeq_stype(x1, x2, env),
        (Fix(b1), Fix(b2)) => aeq_static(b1, b2, env),
        (Within(u1, b1), Within(u2, b2)) => u1 == u2 && aeq_stype(b1, b2, env),
        (Embed(s1), Embed(s2)) => aeq_static(s1, s2, env),
        _ => false,
    }
}

fn aeq_type(a: &LinType, b: &LinType, env: &mut Pairs) -> bool {
    use LinType::*;
    match (a, b) {
        (Var(x), Var(y)) => var_eq(x, y, env),
        (Unit, Unit) => true,
        (Base(n1, i1), Base(n2, i2)) => {
            n1 == n2 && i1.len() == i2.len() && i1.iter().zip(i2).all(|(x, y)| aeq_static(x, y, env))
        }
        (Chan(r1, s1), Chan(r2, s2)) => aeq_static(r1, r2, env) && aeq_stype(s1, s2, env),
        (Pair(l1, r1, k1), Pair(l2, r2, k2)) | (Fun(l1, r1, k1), Fun(l2, r2, k2)) => {
            k1 == k2 && aeq_type(l1, l2, env) && aeq_type(r1, r2, env)
        }
        (Sum(l1, r1), Sum(l2, r2)) => aeq_type(l1, l2, env) && aeq_type(r1, r2, env),
        (Guard(p1, t1), Guard(p2, t2)) | (Assert(p1, t1), Assert(p2, t2)) => {
            aeq_static(p1, p2, env) && aeq_type(t1, t2, env)
        }
        (Forall(x, s1, b1), Forall(y, s2, b2)) | (Exists(x, s1, b1), Exists(y, s2, b2)) => {
            if s1 != s2 {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = aeq_type(b1, b2, env);
            env.pop();
            r
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_avoids_capture() {
        // (fn b: int => a + b)[a := b]  must not capture the free b
        let lam = Static::Lam(
            "b".into(),
            Sort::Int,
            Box::new(Static::bin(Op::Add, Static::var("a"), Static::var("b"))),
        );
        let out = subst_static(&lam, &single("a", Static::var("b")));
        match &out {
            Static::Lam(x, _, body) => {
                assert_ne!(x, "b");
                assert_eq!(**body, Static::bin(Op::Add, Static::var("b"), Static::var(x)));
            }
            _ => panic!("expected lambda"),
        }
    }

    #[test]
    fn alpha_equivalence_respects_binding() {
        let l1 = Static::Lam("x".into(), Sort::Int, Box::new(Static::var("x")));
        let l2 = Static::Lam("y".into(), Sort::Int, Box::new(Static::var("y")));
        let l3 = Static::Lam("y".into(), Sort::Int, Box::new(Static::var("x")));
        assert!(alpha_eq_static(&l1, &l2));
        assert!(!alpha_eq_static(&l1, &l3));
    }

    #[test]
    fn type_variable_substitution() {
        let t = LinType::fun(LinType::Var("t".into()), LinType::Unit, false);
        let out = subst_type(&t, &single("t", Static::ty(LinType::int(None))));
        assert_eq!(out, LinType::fun(LinType::int(None), LinType::Unit, false));
    }
}
