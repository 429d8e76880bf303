#![allow(dead_code)]

pub mod collections;
pub mod entailment;

use std::path::PathBuf;

use dsess::runtime::{run, Outcome, Pool, RunLimits, SchedulerPolicy};
use dsess::typing::{check_source, CheckOptions, CheckedProgram};

pub const EXAMPLES: [&str; 3] = ["hello", "array", "cloud"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn source(name: &str) -> String {
    let path = corpus_dir().join(format!("{}.mps", name));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e))
}

pub fn checked(name: &str) -> CheckedProgram {
    check_source(&source(name), &CheckOptions::default()).unwrap_or_else(|d| panic!("{}: {}", name, d))
}

pub fn run_example(name: &str, policy: SchedulerPolicy, checked_mode: bool) -> Outcome {
    let limits = RunLimits {
        checked: checked_mode,
        ..RunLimits::default()
    };
    run(Pool::from_program(&checked(name)), policy, &limits)
}

/// Every mutant with the diagnostic code named in its `// expect:` header.
pub fn mutants() -> Vec<(String, String, String)> {
    let dir = corpus_dir().join("mutants");
    let mut out = vec![];
    for entry in std::fs::read_dir(&dir).expect("mutant directory") {
        let path = entry.expect("entry").path();
        if path.extension().is_some_and(|e| e == "mps") {
            let text = std::fs::read_to_string(&path).expect("readable");
            let code = text
                .lines()
                .find_map(|l| l.strip_prefix("// expect: "))
                .unwrap_or_else(|| panic!("{} has no expect header", path.display()))
                .trim()
                .to_string();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            out.push((name, code, text));
        }
    }
    out.sort();
    out
}
