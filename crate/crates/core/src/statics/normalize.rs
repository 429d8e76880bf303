//! Normalization of static terms: beta reduction, evaluation of ground
//! operators and resolution of `full`/`comp` against the universe in scope.

use super::subst::{alpha_eq_static, single, subst_static};
use crate::syntax::ast::*;

const FUEL: u32 = 100_000;

struct Normalizer {
    fuel: u32,
}

pub fn normalize_static(s: &Static, universe: Option<&[i64]>) -> Static {
    Normalizer { fuel: FUEL }.stat(s, universe)
}

pub fn normalize_stype(st: &SessionType, universe: Option<&[i64]>) -> SessionType {
    Normalizer { fuel: FUEL }.stype(st, universe)
}

pub fn normalize_type(t: &LinType, universe: Option<&[i64]>) -> LinType {
    Normalizer { fuel: FUEL }.ty(t, universe)
}

/// One unrolling of `fix(f)`: `f(fix(f))`, normalized.
pub fn unfold_fix(binder: &Static, universe: Option<&[i64]>) -> SessionType {
    let fixed = Static::stype(SessionType::Fix(binder.clone()));
    normalize_stype(&SessionType::embed(Static::app(binder.clone(), fixed)), universe)
}

/// The universe attached to a session type, if any.
pub fn universe_of(st: &SessionType) -> Option<&[i64]> {
    st.strip_within().0.map(|v| v.as_slice())
}

fn as_set(s: &Static) -> Option<&Vec<i64>> {
    match s {
        Static::Set(v) => Some(v),
        _ => None,
    }
}

fn union(a: &[i64], b: &[i64]) -> Vec<i64> {
    normalize_roles(a.iter().chain(b).copied())
}

fn inter(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().filter(|x| b.contains(x)).copied().collect()
}

fn minus(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().filter(|x| !b.contains(x)).copied().collect()
}

impl Normalizer {
    fn stat(&mut self, s: &Static, u: Option<&[i64]>) -> Static {
        if self.fuel == 0 {
            return s.clone();
        }
        self.fuel -= 1;
        match s {
            Static::Var(_) | Static::Int(_) | Static::Bool(_) | Static::Set(_) => s.clone(),
            Static::Full => match u {
                Some(u) => Static::Set(u.to_vec()),
                None => Static::Full,
            },
            Static::Lam(a, sort, body) => Static::Lam(a.clone(), sort.clone(), Box::new(self.stat(body, u))),
            Static::App(f, arg) => {
                let f = self.stat(f, u);
                let arg = self.stat(arg, u);
                match f {
                    Static::Lam(a, _, body) => {
                        let reduced = subst_static(&body, &single(&a, arg));
                        self.stat(&reduced, u)
                    }
                    f => Static::app(f, arg),
                }
            }
            Static::SType(st) => Static::stype(self.stype(st, u)),
            Static::Type(t) => Static::ty(self.ty(t, u)),
            Static::Op(op, args) => {
                // short-circuit the conditional before normalizing both arms
                if *op == Op::Ite {
                    let c = self.stat(&args[0], u);
                    return match c {
                        Static::Bool(true) => self.stat(&args[1], u),
                        Static::Bool(false) => self.stat(&args[2], u),
                        c => {
                            let a = self.stat(&args[1], u);
                            let b = self.stat(&args[2], u);
                            if alpha_eq_static(&a, &b) {
                                a
                            } else {
                                Static::Op(Op::Ite, vec![c, a, b])
                            }
                        }
                    };
                }
                let args: Vec<Static> = args.iter().map(|a| self.stat(a, u)).collect();
                eval_op(*op, args, u)
            }
        }
    }

    fn stype(&mut self, st: &SessionType, u: Option<&[i64]>) -> SessionType {
        match st {
            SessionType::End(r) => SessionType::End(self.stat(r, u)),
            SessionType::BMsg { sender, payload, cont } => {
                SessionType::bmsg(self.stat(sender, u), self.ty(payload, u), self.stype(cont, u))
            }
            SessionType::PMsg {
                sender,
                receiver,
                payload,
                cont,
            } => SessionType::pmsg(
                self.stat(sender, u),
                self.stat(receiver, u),
                self.ty(payload, u),
                self.stype(cont, u),
            ),
            SessionType::Quan { role, binder } => SessionType::Quan {
                role: self.stat(role, u),
                binder: self.stat(binder, u),
            },
            SessionType::Branch { role, left, right } => SessionType::Branch {
                role: self.stat(role, u),
                left: Box::new(self.stype(left, u)),
                right: Box::new(self.stype(right, u)),
            },
            SessionType::Fix(b) => SessionType::Fix(self.stat(b, u)),
            SessionType::Within(w, body) => {
                let inner = self.stype(body, Some(w));
                match inner {
                    SessionType::Within(_, b) => SessionType::Within(w.clone(), b),
                    other => SessionType::Within(w.clone(), Box::new(other)),
                }
            }
            SessionType::Embed(s) => SessionType::embed(self.stat(s, u)),
        }
    }

    fn ty(&mut self, t: &LinType, u: Option<&[i64]>) -> LinType {
        match t {
            LinType::Var(_) | LinType::Unit => t.clone(),
            LinType::Base(n, idx) => LinType::Base(n.clone(), idx.iter().map(|s| self.stat(s, u)).collect()),
            LinType::Chan(rs, st) => {
                let st = self.stype(st, u);
                let cu = universe_of(&st).map(|v| v.to_vec());
                let rs = self.stat(rs, cu.as_deref().or(u));
                LinType::chan(rs, st)
            }
            LinType::Pair(l, r, k) => LinType::pair(self.ty(l, u), self.ty(r, u), *k),
            LinType::Fun(l, r, k) => LinType::fun(self.ty(l, u), self.ty(r, u), *k),
            LinType::Sum(l, r) => LinType::sum(self.ty(l, u), self.ty(r, u)),
            LinType::Guard(p, t) => LinType::Guard(self.stat(p, u), Box::new(self.ty(t, u))),
            LinType::Assert(p, t) => LinType::Assert(self.stat(p, u), Box::new(self.ty(t, u))),
            LinType::Forall(a, s, b) => LinType::Forall(a.clone(), s.clone(), Box::new(self.ty(b, u))),
            LinType::Exists(a, s, b) => LinType::Exists(a.clone(), s.clone(), Box::new(self.ty(b, u))),
        }
    }
}

/// Evaluates an operator whose arguments are already normalized.
fn eval_op(op: Op, args: Vec<Static>, u: Option<&[i64]>) -> Static {
    use Static::{Bool, Int, Set};
    let stuck = |args: Vec<Static>| Static::Op(op, args);
    match op {
        Op::Comp => match (u, as_set(&args[0])) {
            (Some(u), Some(x)) => Set(minus(u, x)),
            (Some(u), None) => Static::bin(Op::Minus, Set(u.to_vec()), args[0].clone()),
            _ => stuck(args),
        },
        Op::Union | Op::Inter | Op::Minus | Op::DUnion => match (as_set(&args[0]), as_set(&args[1])) {
            (Some(a), Some(b)) => match op {
                Op::Union => Set(union(a, b)),
                Op::Inter => Set(inter(a, b)),
                Op::Minus => Set(minus(a, b)),
                _ if inter(a, b).is_empty() => Set(union(a, b)),
                // an overlapping disjoint union has no value
                _ => stuck(args),
            },
            _ => stuck(args),
        },
        Op::In | Op::NotIn => match (&args[0], as_set(&args[1])) {
            (Int(r), Some(set)) => Bool(set.contains(r) == (op == Op::In)),
            _ => stuck(args),
        },
        Op::Subset => match (as_set(&args[0]), as_set(&args[1])) {
            (Some(a), Some(b)) => Bool(a.iter().all(|x| b.contains(x))),
            _ if alpha_eq_static(&args[0], &args[1]) => Bool(true),
            _ => stuck(args),
        },
        Op::Eq | Op::Neq => {
            let want = op == Op::Eq;
            if args[0].is_ground_value() && args[1].is_ground_value() {
                Bool((args[0] == args[1]) == want)
            } else if alpha_eq_static(&args[0], &args[1]) {
                Bool(want)
            } else {
                stuck(args)
            }
        }
        Op::Lt | Op::Le | Op::Gt | Op::Ge => match (&args[0], &args[1]) {
            (Int(a), Int(b)) => Bool(match op {
                Op::Lt => a < b,
                Op::Le => a <= b,
                Op::Gt => a > b,
                _ => a >= b,
            }),
            _ => stuck(args),
        },
        Op::Add | Op::Sub | Op::Mul | Op::Div => match (&args[0], &args[1]) {
            (Int(a), Int(b)) => {
                let r = match op {
                    Op::Add => a.checked_add(*b),
                    Op::Sub => a.checked_sub(*b),
                    Op::Mul => a.checked_mul(*b),
                    _ => a.checked_div_euclid(*b),
                };
                r.map(Int).unwrap_or_else(|| stuck(args))
            }
            _ => stuck(args),
        },
        Op::Neg => match &args[0] {
            Int(a) => a.checked_neg().map(Int).unwrap_or_else(|| stuck(args)),
            _ => stuck(args),
        },
        Op::Not => match &args[0] {
            Bool(b) => Bool(!b),
            _ => stuck(args),
        },
        Op::And => match (&args[0], &args[1]) {
            (Bool(false), _) | (_, Bool(false)) => Bool(false),
            (Bool(true), _) => args[1].clone(),
            (_, Bool(true)) => args[0].clone(),
            _ => stuck(args),
        },
        Op::Or => match (&args[0], &args[1]) {
            (Bool(true), _) | (_, Bool(true)) => Bool(true),
            (Bool(false), _) => args[1].clone(),
            (_, Bool(false)) => args[0].clone(),
            _ => stuck(args),
        },
        Op::Implies => match (&args[0], &args[1]) {
            (Bool(false), _) | (_, Bool(true)) => Bool(true),
            (Bool(true), _) => args[1].clone(),
            _ => stuck(args),
        },
        Op::Ite => unreachable!("handled before argument evaluation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_static;

    fn norm(src: &str, u: Option<&[i64]>) -> Static {
        normalize_static(&parse_static(src).unwrap(), u)
    }

    #[test]
    fn ground_set_operations() {
        assert_eq!(norm("union({0}, {2})", None), Static::Set(vec![0, 2]));
        assert_eq!(norm("dunion({0}, {0, 1})", None).to_string(), "dunion({0}, {0, 1})");
        assert_eq!(norm("comp({1})", Some(&[0, 1, 2])), Static::Set(vec![0, 2]));
        assert_eq!(norm("1 in minus(full, {1})", Some(&[0, 1])), Static::Bool(false));
    }

    #[test]
    fn beta_reduction_and_ite() {
        assert_eq!(norm("(fn a: int => a + 1)(2)", None), Static::Int(3));
        assert_eq!(norm("ite(1 < 2, 5, 6)", None), Static::Int(5));
        assert_eq!(norm("ite(b, 5, 5)", None), Static::Int(5));
    }

    #[test]
    fn within_is_flattened_outer_first() {
        let st = SessionType::within(
            vec![0, 1],
            SessionType::within(vec![0, 1, 2], SessionType::End(Static::Int(0))),
        );
        let n = normalize_stype(&st, None);
        assert_eq!(n, SessionType::within(vec![0, 1], SessionType::End(Static::Int(0))));
    }

    #[test]
    fn division_by_zero_is_stuck() {
        assert_eq!(norm("4 / 0", None).to_string(), "4 / 0");
    }
}
