//! The pool interpreter: thread reduction, synchronous session steps,
//! endpoint accounting and the checked run loop.

mod fixtures;
mod pool;
mod run;
mod term;

use std::collections::BTreeMap;

use crate::statics::universe_of;
use crate::syntax::ast::*;
use crate::typing::{CheckedProgram, Signature};

pub use fixtures::crossed_deadlock;
pub use pool::{apply_step, find_enabled, EnabledStep, StepKind};
pub use run::{run, run_observed, BlockedThread, DeadlockReport, Outcome, RunLimits, Scheduler, SchedulerPolicy, StepDirective, TraceEvent};
pub use term::{eval_local, peel, step_thread, strip_spans, subst_var, subst_vars, Stuck};

/// A multiset of endpoints, kept sorted.
pub type ResourceBag = Vec<Endpoint>;

/// Threads, the channel signature and the id counters.
#[derive(Clone, Debug, PartialEq)]
pub struct Pool {
    pub threads: BTreeMap<usize, DynTerm>,
    pub sig: Signature,
    pub next_channel: u64,
    pub next_thread: usize,
}

impl Pool {
    /// The initial pool `{0: main}` of a checked program, with every
    /// definition inlined.
    pub fn from_program(checked: &CheckedProgram) -> Pool {
        Pool::from_unchecked(&checked.program)
    }

    /// The initial pool of a program that was never type-checked. Steps
    /// that rely on elaborated statics may then fail to match.
    pub fn from_unchecked(prog: &Program) -> Pool {
        let mut inlined: BTreeMap<Name, DynTerm> = BTreeMap::new();
        for d in &prog.defs {
            let body = subst_vars(&strip_spans(&d.body), &inlined);
            inlined.insert(d.name.clone(), body);
        }
        let main = subst_vars(&strip_spans(&prog.main), &inlined);
        Pool::from_threads(BTreeMap::from([(0, main)]), Signature::new())
    }

    /// A pool built directly from threads and a signature; nothing is checked.
    pub fn from_threads(threads: BTreeMap<usize, DynTerm>, sig: Signature) -> Pool {
        let next_channel = sig.keys().map(|c| c.0 + 1).max().unwrap_or(0);
        let mut used = 0;
        let threads: BTreeMap<usize, DynTerm> = threads
            .into_iter()
            .map(|(t, e)| {
                used = used.max(t + 1);
                (t, strip_spans(&e))
            })
            .collect();
        let mut max_channel = next_channel;
        for e in threads.values() {
            for ep in rho(e) {
                max_channel = max_channel.max(ep.channel.0 + 1);
            }
        }
        Pool {
            threads,
            sig,
            next_channel: max_channel,
            next_thread: used,
        }
    }

    /// Every endpoint held anywhere in the pool.
    pub fn resources(&self) -> ResourceBag {
        let mut all: ResourceBag = self.threads.values().flat_map(rho).collect();
        all.sort();
        all
    }

    /// Universe of every live channel.
    pub fn universes(&self) -> BTreeMap<ChannelId, Vec<i64>> {
        self.sig
            .iter()
            .map(|(c, st)| (*c, universe_of(st).map(|u| u.to_vec()).unwrap_or_default()))
            .collect()
    }

    /// True once only thread 0 remains and it is a value.
    pub fn is_done(&self) -> bool {
        self.threads.len() == 1 && self.threads.get(&0).is_some_and(DynTerm::is_value)
    }
}

fn bag_union(a: ResourceBag, b: ResourceBag) -> ResourceBag {
    let mut counts: BTreeMap<Endpoint, (usize, usize)> = BTreeMap::new();
    for e in a {
        counts.entry(e).or_default().0 += 1;
    }
    for e in b {
        counts.entry(e).or_default().1 += 1;
    }
    counts
        .into_iter()
        .flat_map(|(e, (x, y))| std::iter::repeat_n(e, x.max(y)))
        .collect()
}

/// The endpoints a term holds. Alternative branches of `if` and `case`
/// contribute their union rather than their sum.
pub fn rho(e: &DynTerm) -> ResourceBag {
    let mut out = match e {
        DynTerm::Endpoint(ep) => vec![ep.clone()],
        DynTerm::If(c, t, f) => {
            let mut bag = rho(c);
            bag.extend(bag_union(rho(t), rho(f)));
            bag
        }
        DynTerm::Case { scrut, left, right } => {
            let mut bag = rho(scrut);
            bag.extend(bag_union(rho(&left.1), rho(&right.1)));
            bag
        }
        _ => e.children().into_iter().flat_map(rho).collect(),
    };
    out.sort();
    out
}

/// Whether the endpoints of each channel partition its universe, with no
/// endpoint of an unknown channel.
pub fn consistent(r: &[Endpoint], universes: &BTreeMap<ChannelId, Vec<i64>>) -> bool {
    let mut by_channel: BTreeMap<ChannelId, Vec<i64>> = BTreeMap::new();
    for ep in r {
        if !universes.contains_key(&ep.channel) {
            return false;
        }
        by_channel.entry(ep.channel).or_default().extend(ep.roles.iter().copied());
    }
    universes.iter().all(|(c, u)| {
        let mut held = by_channel.remove(c).unwrap_or_default();
        held.sort_unstable();
        // a repeated role means two endpoints overlap
        held == *u
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(c: u64, roles: &[i64]) -> Endpoint {
        Endpoint::new(ChannelId(c), roles.to_vec())
    }

    fn u01() -> BTreeMap<ChannelId, Vec<i64>> {
        BTreeMap::from([(ChannelId(0), vec![0, 1])])
    }

    #[test]
    fn rho_of_pair_unit_and_lambda() {
        let p = DynTerm::pair(DynTerm::Endpoint(ep(0, &[0])), DynTerm::Endpoint(ep(0, &[1])));
        assert_eq!(rho(&p), vec![ep(0, &[0]), ep(0, &[1])]);
        assert_eq!(rho(&DynTerm::Unit), vec![]);
        let l = DynTerm::lam("x", None, DynTerm::Endpoint(ep(0, &[0, 1])));
        assert_eq!(rho(&l), vec![ep(0, &[0, 1])]);
    }

    #[test]
    fn rho_of_conditional_is_a_union() {
        let c = DynTerm::Endpoint(ep(0, &[0]));
        let e = DynTerm::If(Box::new(DynTerm::Lit(Lit::Bool(true))), Box::new(c.clone()), Box::new(c));
        assert_eq!(rho(&e), vec![ep(0, &[0])]);
    }

    #[test]
    fn consistency_examples() {
        assert!(consistent(&[ep(0, &[0]), ep(0, &[1])], &u01()));
        assert!(!consistent(&[ep(0, &[0]), ep(0, &[0, 1])], &u01()));
        assert!(!consistent(&[ep(0, &[0])], &u01()));
        assert!(!consistent(&[ep(0, &[0]), ep(0, &[1]), ep(1, &[0])], &u01()));
        assert!(consistent(&[], &BTreeMap::new()));
    }
}
