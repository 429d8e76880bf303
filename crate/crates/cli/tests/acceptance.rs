//! The acceptance criteria, one test each. Every test prints a single
//! `criterion N ... PASS|FAIL` line (visible with `--nocapture`) and fails
//! when its criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::Command;
use std::time::Instant;

use common::collections::{collection, oracle_reducible};
use common::entailment::{agree, problem};
use common::*;
use dsess::dfcheck::*;
use dsess::runtime::*;
use dsess::syntax::ApiName;
use dsess::typing::{check_source, CheckOptions};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRunner};

fn criterion(n: u32, what: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("criterion {:>2} {}: PASS ({})", n, what, detail),
        Err(why) => {
            println!("criterion {:>2} {}: FAIL ({})", n, what, why);
            panic!("criterion {} failed: {}", n, why);
        }
    }
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn policies() -> Vec<SchedulerPolicy> {
    std::iter::once(SchedulerPolicy::RoundRobin)
        .chain((0..50).map(SchedulerPolicy::SeededRandom))
        .collect()
}

/// Deterministic samples from a strategy.
fn samples<S: Strategy>(strategy: S, count: usize, seed: u8) -> Vec<S::Value> {
    let config = Config {
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(
        config,
        proptest::test_runner::TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &[seed; 32]),
    );
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("generates").current())
        .collect()
}

#[test]
fn criterion_01_corpus_runs() {
    let start = Instant::now();
    let result = (|| {
        let mut runs = 0;
        for name in EXAMPLES {
            let checked = check_source(&source(name), &CheckOptions::default()).map_err(|d| format!("{}: {}", name, d))?;
            for policy in policies() {
                let o = run(Pool::from_program(&checked), policy.clone(), &RunLimits::default());
                ensure(o.is_done(), || format!("{} under {:?}: {:?}", name, policy, o))?;
                runs += 1;
            }
        }
        // the drivers: three array elements, two service rounds then quit
        let array = run_example("array", SchedulerPolicy::RoundRobin, false);
        let payloads: Vec<_> = array.trace().iter().filter_map(|e| e.payload_type.clone()).collect();
        ensure(payloads == ["int(3)", "int", "int", "int"], || format!("array payloads {:?}", payloads))?;
        let cloud = run_example("cloud", SchedulerPolicy::RoundRobin, false);
        let branches = cloud.trace().iter().filter(|e| e.kind == "branch").count();
        ensure(branches == 3, || format!("cloud took {} branch steps", branches))?;
        let elapsed = start.elapsed().as_secs_f64();
        ensure(elapsed < 10.0, || format!("took {:.1}s", elapsed))?;
        Ok(format!("{} runs in {:.2}s", runs, elapsed))
    })();
    criterion(1, "corpus acceptance", result);
}

#[test]
fn criterion_02_rejection_suite() {
    let result = (|| {
        let all = mutants();
        ensure(all.len() >= 12, || format!("only {} mutants", all.len()))?;
        for (name, code, text) in &all {
            match check_source(text, &CheckOptions::default()) {
                Ok(_) => return Err(format!("{} was accepted", name)),
                Err(d) => ensure(d.code == *code, || format!("{}: expected {}, got {}", name, code, d))?,
            }
        }
        Ok(format!("{} mutants rejected with their codes", all.len()))
    })();
    criterion(2, "rejection suite", result);
}

#[test]
fn criterion_03_checked_runs() {
    let result = (|| {
        let mut steps = 0;
        for name in EXAMPLES {
            for policy in policies() {
                let o = run_example(name, policy.clone(), true);
                if let Outcome::InvariantViolation { which, step, .. } = &o {
                    return Err(format!("{} under {:?}: {} at step {}", name, policy, which, step));
                }
                ensure(o.is_done(), || format!("{} under {:?}: {:?}", name, policy, o))?;
                steps += o.trace().len();
            }
        }
        Ok(format!("{} checked steps, no violations", steps))
    })();
    criterion(3, "consistency and pool typing after every step", result);
}

/// Runs every example under every policy, calling `check` on every pool.
fn every_pool(mut check: impl FnMut(&Pool) -> Result<(), String>) -> Result<usize, String> {
    let mut pools = 0;
    for name in EXAMPLES {
        let checked = checked(name);
        for policy in policies() {
            let mut failure = None;
            let o = run_observed(Pool::from_program(&checked), policy.clone(), &RunLimits::default(), &mut |step, pool| {
                pools += 1;
                if failure.is_none() {
                    if let Err(e) = check(pool) {
                        failure = Some(format!("{} under {:?}, step {}: {}", name, policy, step, e));
                    }
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
            ensure(o.is_done(), || format!("{} under {:?}: {:?}", name, policy, o))?;
        }
    }
    Ok(pools)
}

#[test]
fn criterion_04_progress() {
    let mut all_blocked = 0;
    let result = every_pool(|pool| {
        ensure(pool.is_done() || !find_enabled(pool, false).is_empty(), || "no enabled step".into())?;
        // blocked on session calls, not on the pool-level fork/cut/elim/split
        let pool_op = |api: &ApiName| matches!(api, ApiName::Fork | ApiName::Cut | ApiName::Elim | ApiName::Split);
        let blocked = pool
            .threads
            .values()
            .all(|e| matches!(step_thread(e), Err(Stuck::Blocked { api, .. }) if !pool_op(&api)));
        if blocked {
            all_blocked += 1;
            ensure(find_blocked_match(pool).is_some(), || "all threads blocked but no cohort matches".into())?;
        }
        Ok(())
    })
    .map(|n| format!("{} pools, {} fully blocked, each with a matching cohort", n, all_blocked));
    criterion(4, "progress", result);
}

#[test]
fn criterion_05_reducibility_along_runs() {
    let result = every_pool(|pool| {
        let m = abstract_pool(pool).map_err(|e| e.to_string())?;
        ensure(df_reducible(&m), || format!("irreducible: {:?}", m.sets))
    })
    .map(|n| format!("{} pools reducible", n));
    criterion(5, "df-reducibility at every step", result);
}

const COLLECTIONS: usize = 10_000;

#[test]
fn criterion_06_relaxed_collections_step() {
    let result = (|| {
        let mut relevant = 0;
        for m in samples(collection(), COLLECTIONS, 6) {
            if relaxed(&m) && m.nonempty() > 0 {
                relevant += 1;
                let steps = m.channels().iter().any(|c| df_step(&m, *c).is_ok());
                ensure(steps, || format!("no step for {:?}", m.sets))?;
            }
        }
        Ok(format!("{} collections, {} relaxed and nonempty, 0 counterexamples", COLLECTIONS, relevant))
    })();
    criterion(6, "relaxed collections admit a step", result);
}

#[test]
fn criterion_07_unrelaxed_collections_are_irreducible() {
    let result = (|| {
        let mut unrelaxed = 0;
        for m in samples(collection(), COLLECTIONS, 7) {
            if !relaxed(&m) {
                unrelaxed += 1;
                ensure(!df_reducible(&m), || format!("reducible but not relaxed: {:?}", m.sets))?;
            }
        }
        Ok(format!("{} collections, {} not relaxed, 0 counterexamples", COLLECTIONS, unrelaxed))
    })();
    criterion(7, "unrelaxed collections are irreducible", result);
}

#[test]
fn criterion_08_graph_matches_exhaustive() {
    let result = (|| {
        let mut reducible = 0;
        for m in samples(collection(), COLLECTIONS, 8) {
            let exhaustive = df_reducible(&m);
            ensure(exhaustive == oracle_reducible(&m), || format!("exhaustive search disagrees with the oracle on {:?}", m.sets))?;
            ensure(df_reducible_graph(&m) == exhaustive, || format!("graph check disagrees on {:?}", m.sets))?;
            reducible += exhaustive as usize;
        }
        Ok(format!("{} collections agree, {} reducible", COLLECTIONS, reducible))
    })();
    criterion(8, "graph check matches exhaustive search", result);
}

#[test]
fn criterion_09_solver_soundness() {
    let result = (|| {
        const N: usize = 5_000;
        for (sh, hyps, goal) in samples(problem(), N, 9) {
            agree(sh, &hyps, &goal)?;
        }
        Ok(format!("{} entailments match brute force", N))
    })();
    criterion(9, "solver soundness", result);
}

#[test]
fn criterion_10_deadlock_fixture() {
    let result = (|| {
        let o = run(crossed_deadlock(), SchedulerPolicy::RoundRobin, &RunLimits::default());
        let Outcome::Deadlock { report, .. } = &o else {
            return Err(format!("expected a deadlock, got {:?}", o));
        };
        let snapshot = report.analysis.as_ref().ok_or("no analysis snapshot")?;
        ensure(!snapshot.relaxed, || "final snapshot is relaxed".into())?;
        let (_, code, text) = mutants()
            .into_iter()
            .find(|(n, _, _)| n == "crossed_channels")
            .ok_or("crossed_channels mutant missing")?;
        let d = check_source(&text, &CheckOptions::default()).err().ok_or("source form accepted")?;
        ensure(d.code == code, || format!("expected {}, got {}", code, d.code))?;
        Ok(format!("Deadlock with relaxed=false; source form rejected with {}", d.code))
    })();
    criterion(10, "crossed deadlock fixture", result);
}

#[test]
fn criterion_11_determinism() {
    let result = (|| {
        let mut checked = 0;
        for name in EXAMPLES {
            let file = corpus_dir().join(format!("{}.mps", name));
            for cmd in ["trace", "analyze"] {
                let out = || {
                    Command::new(env!("CARGO_BIN_EXE_dsess"))
                        .args([cmd, file.to_str().unwrap(), "--seed", "42", "--format", "records"])
                        .output()
                        .expect("binary runs")
                };
                let (a, b) = (out(), out());
                ensure(a.status.success(), || format!("{} {} failed", cmd, name))?;
                ensure(a.stdout == b.stdout, || format!("{} {} differs between runs", cmd, name))?;
                checked += 1;
            }
        }
        Ok(format!("{} command pairs byte-identical", checked))
    })();
    criterion(11, "determinism", result);
}
