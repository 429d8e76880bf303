//! Properties that must hold along every run of an accepted program.

mod common;

use std::collections::BTreeMap;

use common::*;
use dsess::dfcheck::{abstract_pool, df_reducible, df_reducible_graph};
use dsess::runtime::*;
use dsess::syntax::*;
use dsess::typing::{typecheck_pool, CheckOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn checked_runs_hold_every_invariant() {
    for name in EXAMPLES {
        for seed in 0..100 {
            let o = run_example(name, SchedulerPolicy::SeededRandom(seed), true);
            assert!(o.is_done(), "{} seed {}: {:?}", name, seed, o);
        }
        let o = run_example(name, SchedulerPolicy::RoundRobin, true);
        assert!(o.is_done(), "{}: {:?}", name, o);
    }
}

fn count(bag: &[Endpoint]) -> BTreeMap<Endpoint, usize> {
    let mut m = BTreeMap::new();
    for e in bag {
        *m.entry(e.clone()).or_default() += 1;
    }
    m
}

fn by_channel(bag: &[Endpoint], c: ChannelId) -> Vec<Endpoint> {
    bag.iter().filter(|e| e.channel == c).cloned().collect()
}

fn sorted_roles(eps: &[Endpoint]) -> Vec<i64> {
    let mut v: Vec<i64> = eps.iter().flat_map(|e| e.roles.iter().copied()).collect();
    v.sort_unstable();
    v
}

/// Checks how one step changed the endpoint multiset.
fn check_delta(step: &EnabledStep, before: &Pool, after: &Pool) {
    let (b, a) = (before.resources(), after.resources());
    match step.kind {
        StepKind::Lift | StepKind::Gc | StepKind::Bmsg | StepKind::Quan | StepKind::Branch | StepKind::Fix => {
            assert_eq!(count(&b), count(&a), "{:?} changed the endpoints", step.kind)
        }
        StepKind::Msg => {
            assert_eq!(count(&b), count(&a));
            // only the two parties' holdings change, and what one loses the other gains
            for (t, e) in &before.threads {
                if !step.threads.contains(t) {
                    assert_eq!(rho(e), rho(&after.threads[t]));
                }
            }
        }
        StepKind::Fork => {
            let fresh: Vec<ChannelId> = after.sig.keys().filter(|c| !before.sig.contains_key(c)).copied().collect();
            assert_eq!(fresh.len(), 1);
            let new = by_channel(&a, fresh[0]);
            assert_eq!(new.len(), 2);
            assert_eq!(sorted_roles(&new), before_universe(after, fresh[0]));
            assert_eq!(a.len(), b.len() + 2);
        }
        StepKind::End => {
            let c = step.channel.unwrap();
            assert!(by_channel(&a, c).is_empty());
            assert_eq!(a.len(), b.len() - by_channel(&b, c).len());
        }
        StepKind::Split => {
            assert_eq!(a.len(), b.len() + 1);
            for c in before.sig.keys() {
                assert_eq!(sorted_roles(&by_channel(&b, *c)), sorted_roles(&by_channel(&a, *c)));
            }
        }
        StepKind::Elim => {
            assert_eq!(a.len(), b.len() - 1);
            assert!(b.iter().any(|e| e.roles.is_empty()));
        }
        StepKind::Cut => assert_eq!(a.len(), b.len() - 1),
    }
}

fn before_universe(p: &Pool, c: ChannelId) -> Vec<i64> {
    p.universes()[&c].clone()
}

#[test]
fn endpoints_are_conserved_step_by_step() {
    for name in EXAMPLES {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = Pool::from_program(&checked(name));
            for _ in 0..10_000 {
                let enabled = find_enabled(&pool, false);
                if enabled.is_empty() {
                    break;
                }
                let s = &enabled[rng.gen_range(0..enabled.len())];
                let before = pool.clone();
                apply_step(&mut pool, s, false).unwrap();
                check_delta(s, &before, &pool);
                // endpoint types stay balanced
                let sig_ok = typecheck_pool(&pool.threads, &pool.sig, &CheckOptions::default());
                assert!(sig_ok.is_ok(), "{} seed {}: {:?}", name, seed, sig_ok);
            }
            assert!(pool.is_done(), "{} seed {}", name, seed);
        }
    }
}

#[test]
fn both_reducibility_checks_agree_along_runs() {
    for name in EXAMPLES {
        let mut pool = Pool::from_program(&checked(name));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        loop {
            let m = abstract_pool(&pool).unwrap();
            assert!(df_reducible(&m));
            assert!(df_reducible_graph(&m));
            let enabled = find_enabled(&pool, false);
            if enabled.is_empty() {
                break;
            }
            let s = enabled[rng.gen_range(0..enabled.len())].clone();
            apply_step(&mut pool, &s, false).unwrap();
        }
    }
}

#[test]
fn parsed_programs_hold_no_endpoints() {
    for name in EXAMPLES {
        let prog = parse_program(&source(name)).unwrap();
        assert!(!prog.main.contains_endpoint());
        assert!(prog.defs.iter().all(|d| !d.body.contains_endpoint()));
    }
}
