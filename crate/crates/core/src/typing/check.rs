//! Bidirectional checker with leftover-style linear accounting. Every
//! judgment also returns the elaborated term, with inferred static
//! arguments filled in for the interpreter.

use std::collections::{BTreeMap, BTreeSet};

mod call;
mod rules;

use super::diag::{Diagnostic, TResult};
use super::rel::TyEnv;
use crate::solver::DEFAULT_BUDGET;
use crate::statics::subst::free_vars_type;
use crate::statics::*;
use crate::syntax::ast::*;

/// Live channels and their current protocol.
pub type Signature = BTreeMap<ChannelId, SessionType>;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Guards the solver cannot decide become run-time assertions instead
    /// of errors.
    pub assert_runtime: bool,
    pub solver_budget: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            assert_runtime: false,
            solver_budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    name: Name,
    ty: LinType,
    linear: bool,
    used: bool,
}

pub struct Checker {
    pub env: TyEnv,
    entries: Vec<Entry>,
    pub globals: BTreeMap<Name, LinType>,
    pub sig: Signature,
    /// Endpoint literals typed so far.
    pub endpoints: Vec<Endpoint>,
    pub opts: CheckOptions,
    fresh: usize,
    /// Set while checking the direct body of `forall-`.
    pub(super) under_forall_elim: bool,
}

pub(super) fn err(code: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, message)
}

/// Drops static indices so that e.g. `int(1)` and `int(2)` join at `int`.
pub fn erase_indices(t: &LinType) -> LinType {
    use LinType::*;
    match t {
        Base(n, _) => Base(n.clone(), vec![]),
        Pair(l, r, k) => Pair(Box::new(erase_indices(l)), Box::new(erase_indices(r)), *k),
        Sum(l, r) => Sum(Box::new(erase_indices(l)), Box::new(erase_indices(r))),
        other => other.clone(),
    }
}

/// Wraps protocols in channel types with the universe `u` when they carry none.
pub fn attach_universe(t: &LinType, u: &[i64]) -> LinType {
    use LinType::*;
    match t {
        Chan(rs, st) if universe_of(st).is_none() => {
            Chan(rs.clone(), Box::new(SessionType::within(u.to_vec(), (**st).clone())))
        }
        Pair(l, r, k) => Pair(Box::new(attach_universe(l, u)), Box::new(attach_universe(r, u)), *k),
        Sum(l, r) => Sum(Box::new(attach_universe(l, u)), Box::new(attach_universe(r, u))),
        Guard(p, b) => Guard(p.clone(), Box::new(attach_universe(b, u))),
        Assert(p, b) => Assert(p.clone(), Box::new(attach_universe(b, u))),
        Forall(a, s, b) => Forall(a.clone(), s.clone(), Box::new(attach_universe(b, u))),
        Exists(a, s, b) => Exists(a.clone(), s.clone(), Box::new(attach_universe(b, u))),
        other => other.clone(),
    }
}

impl Checker {
    pub fn new(opts: CheckOptions) -> Checker {
        let env = TyEnv {
            budget: opts.solver_budget,
            ..TyEnv::default()
        };
        Checker {
            env,
            entries: vec![],
            globals: BTreeMap::new(),
            sig: Signature::new(),
            endpoints: vec![],
            opts,
            fresh: 0,
            under_forall_elim: false,
        }
    }

    pub(super) fn fresh_name(&mut self, base: &str) -> Name {
        self.fresh += 1;
        format!("{}_{}", base.trim_start_matches('?'), self.fresh)
    }

    // ----- linear context -----

    pub fn bind(&mut self, name: &str, ty: LinType) {
        let linear = self.env.sorts.is_linear(&ty);
        self.entries.push(Entry {
            name: name.to_string(),
            ty,
            linear,
            used: false,
        });
    }

    /// Removes the innermost binder, which must be `name`.
    pub fn unbind(&mut self, name: &str) -> TResult<()> {
        let e = self.entries.pop().expect("binder stack underflow");
        debug_assert_eq!(e.name, name);
        if e.linear && !e.used {
            return Err(err(
                "linear-var-unused",
                format!("linear variable `{}` of type `{}` is never consumed", e.name, e.ty),
            ));
        }
        Ok(())
    }

    fn lookup(&mut self, name: &str) -> TResult<LinType> {
        if let Some(e) = self.entries.iter_mut().rev().find(|e| e.name == name) {
            if e.linear {
                if e.used {
                    return Err(err(
                        "linear-var-reused",
                        format!("linear variable `{}` is used more than once", name),
                    ));
                }
                e.used = true;
            }
            return Ok(e.ty.clone());
        }
        if let Some(t) = self.globals.get(name) {
            return Ok(t.clone());
        }
        Err(err("unbound-name", format!("unbound variable `{}`", name)))
    }

    fn usage(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.used).collect()
    }

    fn restore_usage(&mut self, snap: &[bool]) {
        for (e, u) in self.entries.iter_mut().zip(snap) {
            e.used = *u;
        }
    }

    /// Names of linear entries below `depth` consumed since `before`.
    fn captured_since(&self, before: &[bool], depth: usize) -> Vec<Name> {
        self.entries[..depth]
            .iter()
            .zip(before)
            .filter(|(e, was)| e.linear && e.used && !**was)
            .map(|(e, _)| e.name.clone())
            .collect()
    }

    /// Linear names consumed so far, for reporting.
    pub fn consumed(&self) -> BTreeSet<Name> {
        self.entries.iter().filter(|e| e.linear && e.used).map(|e| e.name.clone()).collect()
    }

    /// Runs both arms of a conditional from the same linear state and
    /// requires them to consume the same variables and endpoints.
    fn branches<A, B>(
        &mut self,
        left: impl FnOnce(&mut Self) -> TResult<A>,
        right: impl FnOnce(&mut Self) -> TResult<B>,
    ) -> TResult<(A, B)> {
        let snap = self.usage();
        let ep0 = self.endpoints.len();
        let a = left(self)?;
        let after_left = self.usage();
        let ep_left: Vec<Endpoint> = self.endpoints.drain(ep0..).collect();
        self.restore_usage(&snap);
        let b = right(self)?;
        let after_right = self.usage();
        let mut ep_right: Vec<Endpoint> = self.endpoints.drain(ep0..).collect();
        if after_left != after_right {
            let diff: Vec<&str> = self
                .entries
                .iter()
                .zip(after_left.iter().zip(&after_right))
                .filter(|(_, (l, r))| l != r)
                .map(|(e, _)| e.name.as_str())
                .collect();
            return Err(err(
                "linear-var-unused",
                format!("`{}` is consumed in only one branch", diff.join("`, `")),
            ));
        }
        let mut sorted_left = ep_left.clone();
        sorted_left.sort();
        ep_right.sort();
        if sorted_left != ep_right {
            return Err(err("linear-var-unused", "branches consume different endpoints"));
        }
        self.endpoints.extend(ep_left);
        Ok((a, b))
    }

    // ----- static helpers -----

    pub(super) fn check_type_wf(&mut self, t: &LinType) -> TResult<Sort> {
        Ok(check_type(&mut self.env.sorts, t)?)
    }

    pub(super) fn prove_or_fail(&mut self, goal: &Static, u: Option<&[i64]>, what: &str) -> TResult<()> {
        let verdict = self.env.prove(goal, u);
        if verdict.is_valid() {
            Ok(())
        } else {
            Err(err("guard-unprovable", format!("cannot prove {} `{}`", what, goal)).with_guard(goal, &verdict))
        }
    }

    fn with_prop<T>(&mut self, p: Option<Static>, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        let pushed = p.is_some();
        if let Some(p) = p {
            self.env.props.push(p);
        }
        let r = f(self);
        if pushed {
            self.env.props.pop();
        }
        r
    }

    fn with_svar<T>(&mut self, a: &str, s: Sort, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        self.env.sorts.push(a, s);
        let r = f(self);
        self.env.sorts.pop();
        r
    }

    /// A name for a static binder that does not clash with anything in scope.
    fn static_binder_name(&mut self, want: &str, avoid: &BTreeSet<Name>) -> Name {
        let clash = self.env.sorts.lookup(want).is_some() || avoid.contains(want);
        if clash {
            self.fresh_name(want)
        } else {
            want.to_string()
        }
    }

    fn join(&mut self, a: &LinType, b: &LinType) -> TResult<LinType> {
        if self.env.subtype(b, a).is_ok() {
            return Ok(a.clone());
        }
        if self.env.subtype(a, b).is_ok() {
            return Ok(b.clone());
        }
        let (ea, eb) = (erase_indices(a), erase_indices(b));
        self.env.subtype(b, &ea)?;
        self.env.subtype(a, &eb)?;
        Ok(ea)
    }

    // ----- the judgment -----

    pub fn infer(&mut self, e: &DynTerm) -> TResult<(LinType, DynTerm)> {
        self.go(e, None)
    }

    pub fn check(&mut self, e: &DynTerm, want: &LinType) -> TResult<DynTerm> {
        self.go(e, Some(want)).map(|(_, t)| t)
    }

    /// Infers when `want` is `None`, checks otherwise; in check mode the
    /// returned type is `want`.
    fn go(&mut self, e: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        let direct_under_elim = if matches!(e, DynTerm::At(..)) {
            self.under_forall_elim
        } else {
            std::mem::replace(&mut self.under_forall_elim, false)
        };
        match e {
            DynTerm::At(span, inner) => {
                let (t, x) = self.go(inner, want).map_err(|d| d.at(Some(*span)))?;
                Ok((t, DynTerm::At(*span, Box::new(x))))
            }
            DynTerm::Lam { param, ann, body } => self.lam(param, ann.as_ref(), body, want),
            DynTerm::App(f, a) => self.app(f, a, want),
            DynTerm::If(c, t, f) => self.if_(c, t, f, want),
            DynTerm::Case { scrut, left, right } => self.case(scrut, left, right, want),
            DynTerm::Pair(l, r) => self.pair(l, r, want),
            DynTerm::Inj { right, body } => self.inj(*right, body, want),
            DynTerm::LetPair {
                left,
                right,
                bound,
                body,
            } => self.let_pair(left, right, bound, body, want),
            DynTerm::GuardIntro(v) => self.guard_intro(v, want),
            DynTerm::AssertIntro(v) => self.assert_intro(v, want),
            DynTerm::LetAssert { var, bound, body } => self.let_assert(var, bound, body, want),
            DynTerm::ForallIntro { var, body } => self.forall_intro(var.as_ref(), body, want),
            DynTerm::ForallElim { body, arg } => self.forall_elim(body, arg.as_ref(), want),
            DynTerm::ExistsIntro { body, witness, ann } => {
                self.exists_intro(body, witness.as_ref(), ann.as_ref(), want)
            }
            DynTerm::LetExists {
                svar,
                var,
                bound,
                body,
            } => self.let_exists(svar.as_ref(), var, bound, body, want),
            DynTerm::ApiCall { api, statics, args, .. } => {
                let r = self.api_call(*api, statics, args, want, direct_under_elim)?;
                self.finish(r, want)
            }
            _ => {
                let r = self.infer_simple(e)?;
                self.finish(r, want)
            }
        }
    }

    /// Switches from inference to checking by subsumption.
    fn finish(&mut self, (t, x): (LinType, DynTerm), want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        match want {
            None => Ok((t, x)),
            Some(w) => {
                self.env.subtype(&t, w)?;
                Ok((w.clone(), x))
            }
        }
    }

    /// Forms with no checking-mode rule of their own.
    fn infer_simple(&mut self, e: &DynTerm) -> TResult<(LinType, DynTerm)> {
        match e {
            DynTerm::Var(x) => Ok((self.lookup(x)?, e.clone())),
            DynTerm::Unit => Ok((LinType::Unit, e.clone())),
            DynTerm::Lit(Lit::Int(v)) => Ok((LinType::int(Some(Static::Int(*v))), e.clone())),
            DynTerm::Lit(Lit::Bool(b)) => Ok((LinType::boolean(Some(Static::Bool(*b))), e.clone())),
            DynTerm::Lit(Lit::Str(_)) => Ok((LinType::string(), e.clone())),
            DynTerm::Endpoint(ep) => self.endpoint(ep).map(|t| (t, e.clone())),
            DynTerm::Fix {
                name,
                param,
                dom,
                cod,
                body,
            } => self.fix(name, param, dom, cod, body),
            DynTerm::Fst(p) | DynTerm::Snd(p) => {
                let first = matches!(e, DynTerm::Fst(_));
                let (t, x) = self.infer(p)?;
                let (l, r) = match t {
                    LinType::Pair(l, r, _) => (*l, *r),
                    other => return Err(err("type-mismatch", format!("expected a pair, found `{}`", other))),
                };
                let (keep, drop) = if first { (l, r) } else { (r, l) };
                if self.env.sorts.is_linear(&drop) {
                    return Err(err(
                        "linear-var-unused",
                        format!("projection discards a linear value of type `{}`", drop),
                    ));
                }
                let x = if first { DynTerm::Fst(Box::new(x)) } else { DynTerm::Snd(Box::new(x)) };
                Ok((keep, x))
            }
            DynTerm::GuardElim(inner) => {
                let (t, x) = self.infer(inner)?;
                match t {
                    LinType::Guard(p, body) => {
                        self.prove_or_fail(&p, None, "the guard")?;
                        Ok((*body, DynTerm::GuardElim(Box::new(x))))
                    }
                    other => Err(err("type-mismatch", format!("expected a guarded value, found `{}`", other))),
                }
            }
            DynTerm::Ascribe(inner, t) => {
                self.check_type_wf(t)?;
                let x = self.check(inner, t)?;
                Ok((t.clone(), DynTerm::Ascribe(Box::new(x), t.clone())))
            }
            DynTerm::Prim(op, args) => self.prim(*op, args),
            _ => unreachable!("handled by go"),
        }
    }

    fn endpoint(&mut self, ep: &Endpoint) -> TResult<LinType> {
        let st = match self.sig.get(&ep.channel) {
            Some(st) => st.clone(),
            None => {
                return Err(err(
                    "dangling-endpoint",
                    format!("endpoint {} refers to a channel with no protocol", ep),
                ))
            }
        };
        if self.endpoints.contains(ep) {
            return Err(err("linear-var-reused", format!("endpoint {} occurs more than once", ep)));
        }
        self.endpoints.push(ep.clone());
        Ok(LinType::chan(Static::Set(ep.roles.clone()), st))
    }
}
