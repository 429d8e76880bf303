use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    p.to_string_lossy().into_owned()
}

fn dsess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsess")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_record(o: &Output) -> serde_json::Value {
    let out = stdout(o);
    serde_json::from_str(out.lines().last().expect("some output")).unwrap()
}

#[test]
fn check_accepts_the_corpus() {
    for name in ["hello.mps", "array.mps", "cloud.mps"] {
        let o = dsess(&["check", &corpus(name)]);
        assert_eq!(code(&o), 0, "{}: {}", name, String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).trim(), "ok: main : unit");
    }
}

#[test]
fn check_reports_structured_diagnostics() {
    let hello = std::fs::read_to_string(corpus("hello.mps")).unwrap();
    let dir = std::env::temp_dir().join(format!("dsess-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("recv.mps");
    std::fs::write(&path, hello.replace("brecv(c)", "recv(c)")).unwrap();
    let o = dsess(&["check", path.to_str().unwrap(), "--format", "records"]);
    assert_eq!(code(&o), 1);
    let d: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(d["code"], "protocol-head-mismatch");
    for key in ["span", "message", "guard", "solverVerdict"] {
        assert!(d.get(key).is_some(), "missing {}", key);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_files_exit_with_two() {
    assert_eq!(code(&dsess(&["check", "/nonexistent/x.mps"])), 2);
    assert_eq!(code(&dsess(&["run", "/nonexistent/x.mps"])), 2);
}

#[test]
fn run_reaches_all_done() {
    let o = dsess(&["run", &corpus("hello.mps"), "--seed", "7", "--checked", "--format", "records"]);
    assert_eq!(code(&o), 0);
    let r = last_record(&o);
    assert_eq!(r["outcome"], "AllDone");
    assert_eq!(r["value"], "()");
    let o = dsess(&["run", &corpus("cloud.mps"), "--max-steps", "10000"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("AllDone"));
}

#[test]
fn run_refuses_ill_typed_programs() {
    let o = dsess(&["run", &corpus("mutants/reuse_endpoint.mps")]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn step_limit_exits_with_three() {
    let o = dsess(&["run", &corpus("array.mps"), "--max-steps", "5", "--format", "records"]);
    assert_eq!(code(&o), 3);
    assert_eq!(last_record(&o)["outcome"], "StepLimit");
}

#[test]
fn crossed_fixture_deadlocks() {
    let o = dsess(&["run", "builtin:crossed-deadlock", "--unsafe-backdoor", "--format", "records"]);
    assert_eq!(code(&o), 1);
    let r = last_record(&o);
    assert_eq!(r["outcome"], "Deadlock");
    assert_eq!(r["analysis"]["relaxed"], false);
    assert_eq!(r["blocked"].as_array().unwrap().len(), 2);
    // without the backdoor the name is just a missing file
    assert_eq!(code(&dsess(&["run", "builtin:crossed-deadlock"])), 2);
}

#[test]
fn analyze_emits_one_record_per_pool() {
    let o = dsess(&["analyze", &corpus("hello.mps"), "--format", "records"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let (outcome, rest) = lines.split_last().unwrap();
    let (summary, snapshots) = rest.split_last().unwrap();
    assert_eq!(outcome["outcome"], "AllDone");
    assert_eq!(snapshots.len() as u64, outcome["steps"].as_u64().unwrap() + 1);
    assert!(snapshots.iter().all(|s| s["df_reducible"] == true && s["relaxed"] == true));
    assert_eq!(summary["summary"]["always_reducible"], true);
    assert!(summary["summary"]["min_slack"].as_i64().unwrap() >= 0);

    let o = dsess(&["analyze", &corpus("cloud.mps"), "--seed", "3", "--format", "records"]);
    let out = stdout(&o);
    let summary: serde_json::Value = serde_json::from_str(out.lines().rev().nth(1).unwrap()).unwrap();
    assert_eq!(summary["summary"]["always_relaxed"], true);

    let o = dsess(&["analyze", "builtin:crossed-deadlock", "--unsafe-backdoor", "--format", "records"]);
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["relaxed"], false);
}

#[test]
fn same_seed_same_bytes() {
    for cmd in ["trace", "analyze"] {
        let args = [cmd, &corpus("cloud.mps"), "--seed", "11", "--format", "records"];
        let a = dsess(&args);
        let b = dsess(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn trace_records_carry_the_step_fields() {
    let o = dsess(&["trace", &corpus("hello.mps"), "--format", "records"]);
    let out = stdout(&o);
    let first: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    for key in ["step", "kind", "channel", "threads", "payload_type", "sig_before", "sig_after"] {
        assert!(first.get(key).is_some(), "missing {}", key);
    }
    assert_eq!(first["kind"], "fork");
}

#[test]
fn erase_proofs_and_runtime_assertions_are_accepted() {
    let o = dsess(&["run", &corpus("array.mps"), "--erase-proofs", "--assert-runtime", "--solver-budget", "100000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
