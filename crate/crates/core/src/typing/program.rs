//! Entry points: whole programs, single expressions and thread pools.

use std::collections::{BTreeMap, BTreeSet};

use super::check::{CheckOptions, Checker, Signature};
use super::diag::{Diagnostic, TResult};
use crate::statics::*;
use crate::syntax::ast::*;

/// A program that passed the checker, with inferred static arguments filled in.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub program: Program,
    pub main_type: LinType,
    pub def_types: BTreeMap<Name, LinType>,
}

/// Nonlinear and linear variable typings.
#[derive(Clone, Debug, Default)]
pub struct TypeCtx {
    pub nonlinear: BTreeMap<Name, LinType>,
    pub linear: BTreeMap<Name, LinType>,
}

pub fn check_protocols(prog: &Program) -> TResult<()> {
    for decl in prog.protocols.values() {
        let mut ctx = SortCtx::new();
        for (p, s) in &decl.params {
            ctx.push(p, s.clone());
        }
        let st = SessionType::within(decl.universe.clone(), decl.def.clone());
        check_stype(&mut ctx, &st, Some(&decl.universe))
            .map_err(|e| Diagnostic::from(e).at(Some(decl.span)))?;
        let aliases_ok = decl.roles.iter().all(|(_, r)| decl.universe.contains(r));
        if !aliases_ok {
            return Err(Diagnostic::new(
                "role-out-of-universe",
                format!("a role of `{}` lies outside its universe", decl.name),
            )
            .at(Some(decl.span)));
        }
    }
    Ok(())
}

pub fn check_program(prog: &Program, opts: &CheckOptions) -> TResult<CheckedProgram> {
    check_protocols(prog)?;
    let mut ck = Checker::new(opts.clone());
    ck.env.ambient = prog.ambient_universe();
    let mut defs = vec![];
    for d in &prog.defs {
        let (ty, body) = match &d.ann {
            Some(t) => {
                ck.check_type_wf(t).map_err(|e| e.at(Some(d.span)))?;
                (t.clone(), ck.check(&d.body, t).map_err(|e| e.at(Some(d.span)))?)
            }
            None => ck.infer(&d.body).map_err(|e| e.at(Some(d.span)))?,
        };
        if ck.env.sorts.is_linear(&ty) {
            return Err(Diagnostic::new(
                "type-mismatch",
                format!("definition `{}` has the linear type `{}`; definitions must be reusable", d.name, ty),
            )
            .at(Some(d.span)));
        }
        ck.globals.insert(d.name.clone(), ty);
        defs.push(TermDef {
            body,
            ..d.clone()
        });
    }
    let (main_type, main) = ck.infer(&prog.main)?;
    Ok(CheckedProgram {
        program: Program {
            defs,
            main,
            ..prog.clone()
        },
        main_type,
        def_types: ck.globals,
    })
}

/// Parses and checks a whole program.
pub fn check_source(src: &str, opts: &CheckOptions) -> TResult<CheckedProgram> {
    let prog = crate::syntax::parse_program(src)?;
    check_program(&prog, opts)
}

/// Types `e` and reports the linear variables of `ctx` it consumes.
pub fn typecheck_expr(
    sorts: &SortCtx,
    props: &[Static],
    ctx: &TypeCtx,
    sig: &Signature,
    e: &DynTerm,
) -> TResult<(LinType, BTreeSet<Name>)> {
    let mut ck = Checker::new(CheckOptions::default());
    ck.env.sorts = sorts.clone();
    ck.env.props = props.to_vec();
    ck.env.ambient = sig_universe(sig);
    ck.sig = sig.clone();
    ck.globals = ctx.nonlinear.clone();
    for (x, t) in &ctx.linear {
        ck.bind(x, t.clone());
    }
    let (t, _) = ck.infer(e)?;
    Ok((t, ck.consumed()))
}

/// Equality of two types under `props`; undecided index equations count as
/// unequal.
pub fn type_equal(sorts: &SortCtx, props: &[Static], a: &LinType, b: &LinType) -> bool {
    let mut env = super::TyEnv {
        sorts: sorts.clone(),
        props: props.to_vec(),
        ..Default::default()
    };
    env.type_eq(a, b).is_ok()
}

fn sig_universe(sig: &Signature) -> Vec<i64> {
    normalize_roles(sig.values().filter_map(universe_of).flatten().copied())
}

/// Thread 0 may have any type, every other thread must have type `unit`,
/// and each live channel's endpoints must partition its universe.
pub fn typecheck_pool(threads: &BTreeMap<usize, DynTerm>, sig: &Signature, opts: &CheckOptions) -> TResult<()> {
    let mut ck = Checker::new(opts.clone());
    ck.env.ambient = sig_universe(sig);
    ck.sig = sig.clone();
    for (tid, body) in threads {
        let with_thread = |d: Diagnostic| Diagnostic {
            message: format!("thread {}: {}", tid, d.message),
            ..d
        };
        if *tid == 0 {
            ck.infer(body).map_err(with_thread)?;
        } else {
            ck.check(body, &LinType::Unit).map_err(with_thread)?;
        }
    }
    for (c, st) in sig {
        let universe = universe_of(st).map(|u| u.to_vec()).unwrap_or_default();
        let mut held: Vec<i64> = ck
            .endpoints
            .iter()
            .filter(|e| e.channel == *c)
            .flat_map(|e| e.roles.iter().copied())
            .collect();
        held.sort_unstable();
        if held != universe {
            return Err(Diagnostic::new(
                "dangling-endpoint",
                format!(
                    "the endpoints of {} hold roles {} but its universe is {}",
                    c,
                    Static::Set(held),
                    Static::Set(universe)
                ),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_static, parse_type};

    fn infer(src: &str) -> TResult<LinType> {
        let e = parse_expr(src).unwrap();
        typecheck_expr(&SortCtx::new(), &[], &TypeCtx::default(), &Signature::new(), &e).map(|(t, _)| t)
    }

    #[test]
    fn identity_on_an_endpoint_fits_a_linear_arrow() {
        // capturing nothing, the closure itself is unrestricted
        let t = infer("lam (x: chan({0}, within({0, 1}, end(0)))) => x").unwrap();
        assert_eq!(t, parse_type("chan({0}, within({0, 1}, end(0))) -> chan({0}, within({0, 1}, end(0)))").unwrap());
        let lin = "chan({0}, within({0, 1}, end(0))) -o chan({0}, within({0, 1}, end(0)))";
        let t = infer(&format!("(lam (x: chan({{0}}, within({{0, 1}}, end(0)))) => x : {})", lin)).unwrap();
        assert_eq!(t, parse_type(lin).unwrap());
    }

    #[test]
    fn closed_lambdas_are_unrestricted() {
        let t = infer("lam (n: int) => add(n, 1)").unwrap();
        assert!(matches!(t, LinType::Fun(_, _, false)), "{}", t);
    }

    #[test]
    fn dropping_an_endpoint_is_rejected() {
        let d = infer("lam (x: chan({0}, within({0, 1}, end(0)))) => ()").unwrap_err();
        assert_eq!(d.code, "linear-var-unused");
    }

    #[test]
    fn type_equality_uses_the_assumptions() {
        let mut sorts = SortCtx::new();
        sorts.push("n", Sort::Int);
        sorts.push("m", Sort::Int);
        let a = parse_type("int(n + 1)").unwrap();
        let b = parse_type("int(1 + n)").unwrap();
        assert!(type_equal(&sorts, &[], &a, &b));
        let c = parse_type("int(n)").unwrap();
        assert!(!type_equal(&sorts, &[], &a, &c));
        assert!(!type_equal(&sorts, &[], &c, &parse_type("int(m)").unwrap()));
        let eq = parse_static("m = n").unwrap();
        assert!(type_equal(&sorts, &[eq], &c, &parse_type("int(m)").unwrap()));
        assert!(type_equal(&SortCtx::new(), &[], &parse_type("int * string").unwrap(), &parse_type("int * string").unwrap()));
        assert!(!type_equal(&SortCtx::new(), &[], &parse_type("int -o int").unwrap(), &parse_type("int -> int").unwrap()));
    }
}
