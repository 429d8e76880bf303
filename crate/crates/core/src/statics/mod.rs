//! Sorting and well-formedness of static terms, session types and types.

pub mod normalize;
pub mod subst;

pub use normalize::{normalize_static, normalize_stype, normalize_type, unfold_fix, universe_of};
pub use subst::{
    alpha_eq_static, alpha_eq_stype, alpha_eq_type, free_vars, fresh_name, single, subst_static,
    subst_stype, subst_term_statics, subst_type, StaticMap,
};

use crate::syntax::ast::*;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct StaticError {
    pub code: &'static str,
    pub message: String,
}

fn err<T>(code: &'static str, message: impl Into<String>) -> Result<T, StaticError> {
    Err(StaticError {
        code,
        message: message.into(),
    })
}

/// Sorts of the static variables in scope, innermost last.
#[derive(Clone, Debug, Default)]
pub struct SortCtx {
    vars: Vec<(Name, Sort)>,
}

impl SortCtx {
    pub fn new() -> SortCtx {
        SortCtx::default()
    }

    pub fn push(&mut self, name: &str, sort: Sort) {
        self.vars.push((name.to_string(), sort));
    }

    /// Declares a variable below every scoped binder, so it stays in scope
    /// for the rest of the check.
    pub fn push_outer(&mut self, name: &str, sort: Sort) {
        self.vars.insert(0, (name.to_string(), sort));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Sort> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.vars.iter().map(|(n, _)| n)
    }

    pub fn entries(&self) -> &[(Name, Sort)] {
        &self.vars
    }

    fn scoped<T>(&mut self, name: &str, sort: Sort, f: impl FnOnce(&mut Self) -> T) -> T {
        self.push(name, sort);
        let r = f(self);
        self.pop();
        r
    }

    /// Whether `t` must be used linearly, given the sorts of its type variables.
    pub fn is_linear(&self, t: &LinType) -> bool {
        t.is_linear_with(&|n| matches!(self.lookup(n), Some(Sort::Type)))
    }
}

fn expect(ctx: &mut SortCtx, s: &Static, want: &Sort) -> Result<(), StaticError> {
    let got = sort_of(ctx, s)?;
    if got.fits(want) {
        Ok(())
    } else {
        err(
            "sort-mismatch",
            format!("`{}` has sort {} but {} was expected", s, got, want),
        )
    }
}

pub fn sort_of(ctx: &mut SortCtx, s: &Static) -> Result<Sort, StaticError> {
    match s {
        Static::Var(n) => match ctx.lookup(n) {
            Some(sort) => Ok(sort.clone()),
            None => err("unbound-name", format!("unbound static variable `{}`", n)),
        },
        Static::Int(_) => Ok(Sort::Int),
        Static::Bool(_) => Ok(Sort::Bool),
        Static::Set(_) | Static::Full => Ok(Sort::Set),
        Static::Op(op, args) => sort_of_op(ctx, *op, args),
        Static::Lam(a, sort, body) => {
            let cod = ctx.scoped(a, sort.clone(), |c| sort_of(c, body))?;
            Ok(Sort::arrow(sort.clone(), cod))
        }
        Static::App(f, a) => match sort_of(ctx, f)? {
            Sort::Arrow(dom, cod) => {
                expect(ctx, a, &dom)?;
                Ok(*cod)
            }
            other => err("sort-mismatch", format!("`{}` of sort {} is not a function", f, other)),
        },
        Static::SType(st) => {
            check_stype(ctx, st, None)?;
            Ok(Sort::SType)
        }
        Static::Type(t) => {
            check_type(ctx, t)?;
            Ok(if ctx.is_linear(t) { Sort::VType } else { Sort::Type })
        }
    }
}

fn sort_of_op(ctx: &mut SortCtx, op: Op, args: &[Static]) -> Result<Sort, StaticError> {
    if args.len() != op.arity() {
        return err("sort-mismatch", format!("operator expects {} arguments", op.arity()));
    }
    let all = |ctx: &mut SortCtx, sort: Sort| -> Result<(), StaticError> {
        args.iter().try_for_each(|a| expect(ctx, a, &sort))
    };
    match op {
        Op::Union | Op::DUnion | Op::Inter | Op::Minus | Op::Comp => {
            all(ctx, Sort::Set)?;
            Ok(Sort::Set)
        }
        Op::Subset => {
            all(ctx, Sort::Set)?;
            Ok(Sort::Bool)
        }
        Op::In | Op::NotIn => {
            expect(ctx, &args[0], &Sort::Int)?;
            expect(ctx, &args[1], &Sort::Set)?;
            Ok(Sort::Bool)
        }
        Op::Eq | Op::Neq => {
            let s = sort_of(ctx, &args[0])?;
            if !matches!(s, Sort::Int | Sort::Bool | Sort::Set) {
                return err("sort-mismatch", format!("cannot compare terms of sort {}", s));
            }
            expect(ctx, &args[1], &s)?;
            Ok(Sort::Bool)
        }
        Op::Lt | Op::Le | Op::Gt | Op::Ge => {
            all(ctx, Sort::Int)?;
            Ok(Sort::Bool)
        }
        Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Neg => {
            all(ctx, Sort::Int)?;
            Ok(Sort::Int)
        }
        Op::And | Op::Or | Op::Not | Op::Implies => {
            all(ctx, Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Op::Ite => {
            expect(ctx, &args[0], &Sort::Bool)?;
            let a = sort_of(ctx, &args[1])?;
            let b = sort_of(ctx, &args[2])?;
            if b.fits(&a) {
                Ok(a)
            } else if a.fits(&b) {
                Ok(b)
            } else {
                err("sort-mismatch", format!("conditional arms have sorts {} and {}", a, b))
            }
        }
    }
}

fn check_role(ctx: &mut SortCtx, r: &Static, universe: Option<&[i64]>) -> Result<(), StaticError> {
    expect(ctx, r, &Sort::Int)?;
    if let (Static::Int(v), Some(u)) = (r, universe) {
        if !u.contains(v) {
            return err(
                "role-out-of-universe",
                format!("role {} is not in the universe {}", v, Static::Set(u.to_vec())),
            );
        }
    }
    Ok(())
}

/// Well-formedness of a session type: sorts, role bounds, no self-messages
/// and contractive recursion.
pub fn check_stype(ctx: &mut SortCtx, st: &SessionType, universe: Option<&[i64]>) -> Result<(), StaticError> {
    match st {
        SessionType::End(r) => check_role(ctx, r, universe),
        SessionType::BMsg { sender, payload, cont } => {
            check_role(ctx, sender, universe)?;
            check_type(ctx, payload)?;
            if ctx.is_linear(payload) {
                return err(
                    "sort-mismatch",
                    format!("broadcast payload `{}` must be nonlinear", payload),
                );
            }
            check_stype(ctx, cont, universe)
        }
        SessionType::PMsg {
            sender,
            receiver,
            payload,
            cont,
        } => {
            check_role(ctx, sender, universe)?;
            check_role(ctx, receiver, universe)?;
            if sender.is_ground_value() && sender == receiver {
                return err("self-loop", format!("role {} sends a message to itself", sender));
            }
            check_type(ctx, payload)?;
            check_stype(ctx, cont, universe)
        }
        SessionType::Quan { role, binder } => {
            check_role(ctx, role, universe)?;
            match sort_of(ctx, binder)? {
                Sort::Arrow(dom, cod) if *cod == Sort::SType && !matches!(*dom, Sort::Arrow(..)) => {
                    check_binder_body(ctx, binder, universe)
                }
                other => err(
                    "sort-mismatch",
                    format!("quantifier body must have sort _ -> stype, found {}", other),
                ),
            }
        }
        SessionType::Branch { role, left, right } => {
            check_role(ctx, role, universe)?;
            check_stype(ctx, left, universe)?;
            check_stype(ctx, right, universe)
        }
        SessionType::Fix(binder) => {
            expect(ctx, binder, &Sort::arrow(Sort::SType, Sort::SType))?;
            if let Static::Lam(y, _, body) = binder {
                if !contractive(&SessionType::embed((**body).clone()), y) {
                    return err(
                        "non-contractive-fix",
                        format!("recursion variable `{}` is not guarded by a message", y),
                    );
                }
            }
            check_binder_body(ctx, binder, universe)
        }
        SessionType::Within(u, body) => check_stype(ctx, body, Some(u)),
        SessionType::Embed(s) => {
            if let Static::Op(Op::Ite, args) = s {
                expect(ctx, &args[0], &Sort::Bool)?;
                check_stype(ctx, &SessionType::embed(args[1].clone()), universe)?;
                return check_stype(ctx, &SessionType::embed(args[2].clone()), universe);
            }
            expect(ctx, s, &Sort::SType)
        }
    }
}

/// Re-checks a binder's body with the universe so role bounds are enforced.
fn check_binder_body(ctx: &mut SortCtx, binder: &Static, universe: Option<&[i64]>) -> Result<(), StaticError> {
    if let Static::Lam(a, sort, body) = binder {
        let body = SessionType::embed((**body).clone());
        ctx.scoped(a, sort.clone(), |c| check_stype(c, &body, universe))
    } else {
        Ok(())
    }
}

/// A recursion body is contractive when every path reaches a communication
/// before the recursion variable.
pub fn contractive(body: &SessionType, y: &str) -> bool {
    match body {
        SessionType::Embed(Static::Var(v)) => v != y,
        SessionType::Embed(Static::Op(Op::Ite, args)) => {
            contractive(&SessionType::embed(args[1].clone()), y)
                && contractive(&SessionType::embed(args[2].clone()), y)
        }
        SessionType::Branch { left, right, .. } => contractive(left, y) && contractive(right, y),
        SessionType::Within(_, b) => contractive(b, y),
        SessionType::Fix(Static::Lam(z, _, inner)) => {
            z == y || contractive(&SessionType::embed((**inner).clone()), y)
        }
        _ => true,
    }
}

/// Well-formedness of a type; returns `Type` for nonlinear and `VType` for
/// linear types.
pub fn check_type(ctx: &mut SortCtx, t: &LinType) -> Result<Sort, StaticError> {
    match t {
        LinType::Var(n) => match ctx.lookup(n) {
            Some(s @ (Sort::Type | Sort::VType)) => Ok(s.clone()),
            Some(other) => err(
                "sort-mismatch",
                format!("`{}` has sort {} and is not a type", n, other),
            ),
            None => err("unbound-name", format!("unbound type variable `{}`", n)),
        },
        LinType::Unit => Ok(Sort::Type),
        LinType::Base(name, idx) => {
            let want = match name.as_str() {
                "int" => Some(Sort::Int),
                "bool" => Some(Sort::Bool),
                "string" => None,
                _ => return err("unbound-name", format!("unknown base type `{}`", name)),
            };
            match (want, idx.len()) {
                (_, 0) => {}
                (Some(sort), 1) => expect(ctx, &idx[0], &sort)?,
                _ => return err("sort-mismatch", format!("wrong number of indices for `{}`", name)),
            }
            Ok(Sort::Type)
        }
        LinType::Chan(rs, st) => {
            expect(ctx, rs, &Sort::Set)?;
            check_stype(ctx, st, None)?;
            if let (Static::Set(v), Some(u)) = (rs, universe_of(st)) {
                if let Some(r) = v.iter().find(|r| !u.contains(r)) {
                    return err(
                        "role-out-of-universe",
                        format!("role {} is not in the universe {}", r, Static::Set(u.to_vec())),
                    );
                }
            }
            Ok(Sort::VType)
        }
        LinType::Pair(l, r, _) | LinType::Fun(l, r, _) | LinType::Sum(l, r) => {
            check_type(ctx, l)?;
            check_type(ctx, r)?;
            Ok(if ctx.is_linear(t) { Sort::VType } else { Sort::Type })
        }
        LinType::Guard(p, inner) | LinType::Assert(p, inner) => {
            expect(ctx, p, &Sort::Bool)?;
            check_type(ctx, inner)
        }
        LinType::Forall(a, sort, body) | LinType::Exists(a, sort, body) => {
            ctx.scoped(a, sort.clone(), |c| check_type(c, body))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_static, parse_stype, parse_type};

    fn stype_err(src: &str) -> Option<&'static str> {
        let st = parse_stype(src).unwrap();
        check_stype(&mut SortCtx::new(), &st, None).err().map(|e| e.code)
    }

    #[test]
    fn sorts_of_operators() {
        let mut ctx = SortCtx::new();
        ctx.push("rs", Sort::Set);
        assert_eq!(sort_of(&mut ctx, &parse_static("1 in union(rs, {2})").unwrap()), Ok(Sort::Bool));
        assert_eq!(
            sort_of(&mut ctx, &parse_static("rs + 1").unwrap()).unwrap_err().code,
            "sort-mismatch"
        );
    }

    #[test]
    fn session_type_checks() {
        assert_eq!(stype_err("within({0,1}, msg(0, int) :: end(0))"), None);
        assert_eq!(stype_err("within({0,1}, msg(0 -> 0, int) :: end(0))"), Some("self-loop"));
        assert_eq!(stype_err("within({0,1}, end(5))"), Some("role-out-of-universe"));
        assert_eq!(stype_err("fix(fn y: stype => y)"), Some("non-contractive-fix"));
        assert_eq!(stype_err("fix(fn y: stype => msg(0, int) :: y)"), None);
        assert_eq!(stype_err("end(true)"), Some("sort-mismatch"));
    }

    #[test]
    fn channel_types_are_linear() {
        let t = parse_type("chan({0}, within({0,1}, end(0)))").unwrap();
        assert_eq!(check_type(&mut SortCtx::new(), &t), Ok(Sort::VType));
        let t = parse_type("chan({3}, within({0,1}, end(0)))").unwrap();
        assert_eq!(check_type(&mut SortCtx::new(), &t).unwrap_err().code, "role-out-of-universe");
    }
}
