mod common;

use common::*;
use dsess::runtime::{Outcome, SchedulerPolicy};
use dsess::syntax::*;
use dsess::typing::{check_source, CheckOptions};

#[test]
fn examples_type_check_to_unit() {
    for name in EXAMPLES {
        assert_eq!(checked(name).main_type, LinType::Unit, "{}", name);
    }
}

fn kinds(o: &Outcome) -> Vec<String> {
    o.trace().iter().filter(|e| e.kind != "lift").map(|e| e.kind.clone()).collect()
}

#[test]
fn hello_exchanges_two_messages_then_ends() {
    let o = run_example("hello", SchedulerPolicy::RoundRobin, false);
    assert!(o.is_done());
    assert_eq!(kinds(&o), ["fork", "bmsg", "bmsg", "end", "gc"]);
    let payloads: Vec<_> = o.trace().iter().filter_map(|e| e.payload_type.clone()).collect();
    assert_eq!(payloads, ["string", "string"]);
}

#[test]
fn array_sends_length_then_three_elements() {
    let o = run_example("array", SchedulerPolicy::RoundRobin, false);
    assert!(o.is_done());
    let payloads: Vec<_> = o.trace().iter().filter_map(|e| e.payload_type.clone()).collect();
    assert_eq!(payloads, ["int(3)", "int", "int", "int"]);
    let k = kinds(&o);
    assert_eq!(k.iter().filter(|k| *k == "quan").count(), 1);
    assert_eq!(k.iter().filter(|k| *k == "branch").count(), 4);
}

#[test]
fn cloud_runs_two_echo_rounds() {
    let o = run_example("cloud", SchedulerPolicy::RoundRobin, false);
    assert!(o.is_done());
    let k = kinds(&o);
    // two rounds plus the final choice to stop
    assert_eq!(k.iter().filter(|k| *k == "branch").count(), 3);
    // the provider's channel and one echo session per round
    assert_eq!(k.iter().filter(|k| *k == "end").count(), 3);
    assert_eq!(k.iter().filter(|k| *k == "split").count(), 1);
}

#[test]
fn final_value_is_scheduler_independent() {
    for name in EXAMPLES {
        let reference = match run_example(name, SchedulerPolicy::RoundRobin, false) {
            Outcome::AllDone { value, .. } => value,
            other => panic!("{}: {:?}", name, other),
        };
        for seed in 0..50 {
            match run_example(name, SchedulerPolicy::SeededRandom(seed), false) {
                Outcome::AllDone { value, .. } => assert_eq!(value, reference, "{} seed {}", name, seed),
                other => panic!("{} seed {}: {:?}", name, seed, other),
            }
        }
    }
}

#[test]
fn traces_are_reproducible_per_seed() {
    for seed in [1, 7, 42] {
        let a = run_example("cloud", SchedulerPolicy::SeededRandom(seed), false);
        let b = run_example("cloud", SchedulerPolicy::SeededRandom(seed), false);
        assert_eq!(a.trace(), b.trace());
    }
}

#[test]
fn erased_proofs_still_finish() {
    use dsess::runtime::{run, Pool, RunLimits};
    for name in EXAMPLES {
        let limits = RunLimits {
            erase_proofs: true,
            ..RunLimits::default()
        };
        for seed in 0..10 {
            let o = run(Pool::from_program(&checked(name)), SchedulerPolicy::SeededRandom(seed), &limits);
            assert!(o.is_done(), "{} seed {}: {:?}", name, seed, o);
            assert!(o.trace().iter().all(|e| e.kind != "fix"), "{}", name);
        }
    }
}

#[test]
fn mutants_are_rejected_with_their_codes() {
    let all = mutants();
    assert!(all.len() >= 12);
    for (name, code, text) in all {
        match check_source(&text, &CheckOptions::default()) {
            Ok(_) => panic!("mutant {} was accepted", name),
            Err(d) => assert_eq!(d.code, code, "mutant {}: {}", name, d),
        }
    }
}
