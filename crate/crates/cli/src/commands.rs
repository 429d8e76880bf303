use std::path::Path;

use dsess::dfcheck::{abstract_pool, relaxed, Snapshot};
use dsess::runtime::{crossed_deadlock, run_observed, Outcome, Pool, RunLimits, SchedulerPolicy, TraceEvent};
use dsess::syntax::{parse_program, term_to_string, type_to_string};
use dsess::typing::{check_source, CheckOptions, Diagnostic};
use serde_json::{json, Value};

use crate::{CheckFlags, Format, RunArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_STEP_LIMIT: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

const CROSSED_FIXTURE: &str = "builtin:crossed-deadlock";

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Outcome,
    Trace,
    Analyze,
}

fn options(flags: &CheckFlags) -> CheckOptions {
    let mut opts = CheckOptions {
        assert_runtime: flags.assert_runtime,
        ..CheckOptions::default()
    };
    if let Some(b) = flags.solver_budget {
        opts.solver_budget = b;
    }
    opts
}

fn read(file: &Path) -> Result<String, u8> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {}", file.display(), e);
        EXIT_IO
    })
}

fn report(file: &Path, d: &Diagnostic, format: Format) {
    match format {
        Format::Text => eprintln!("{}: {}", file.display(), d),
        Format::Records => eprintln!("{}", d.to_json()),
    }
}

pub fn check(file: &Path, flags: &CheckFlags) -> u8 {
    let src = match read(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match check_source(&src, &options(flags)) {
        Ok(checked) => {
            let ty = type_to_string(&checked.main_type);
            match flags.format {
                Format::Text => println!("ok: main : {}", ty),
                Format::Records => println!("{}", json!({"status": "ok", "main_type": ty})),
            }
            EXIT_OK
        }
        Err(d) => {
            report(file, &d, flags.format);
            EXIT_REJECTED
        }
    }
}

/// The initial pool, after checking unless the backdoor is open.
fn load(args: &RunArgs, opts: &CheckOptions) -> Result<Pool, u8> {
    if args.unsafe_backdoor && args.file.as_os_str() == CROSSED_FIXTURE {
        return Ok(crossed_deadlock());
    }
    let src = read(&args.file)?;
    let pool = if args.unsafe_backdoor {
        parse_program(&src).map(|p| Pool::from_unchecked(&p)).map_err(Diagnostic::from)
    } else {
        check_source(&src, opts).map(|c| Pool::from_program(&c))
    };
    pool.map_err(|d| {
        report(&args.file, &d, args.check.format);
        EXIT_REJECTED
    })
}

/// One `analyze` record: the snapshot plus the slack of the relaxed
/// inequality (`None` once no set holds an endpoint).
fn analysis(step: usize, pool: &Pool) -> (Value, Option<i64>) {
    match abstract_pool(pool) {
        Ok(m) => {
            let slack = (m.nonempty() > 0)
                .then(|| m.nonempty() as i64 - (m.endpoint_count() as i64 - m.channels().len() as i64 + 1));
            debug_assert_eq!(slack.is_none_or(|s| s >= 0), relaxed(&m));
            let mut v = serde_json::to_value(Snapshot::of(step, &m)).expect("snapshots serialize");
            v["slack"] = json!(slack);
            (v, slack)
        }
        Err(e) => (json!({"step": step, "error": e.to_string()}), None),
    }
}

fn exit_code(o: &Outcome) -> u8 {
    match o {
        Outcome::AllDone { .. } => EXIT_OK,
        Outcome::Deadlock { .. } | Outcome::ScriptError { .. } => EXIT_REJECTED,
        Outcome::StepLimit { .. } => EXIT_STEP_LIMIT,
        Outcome::InvariantViolation { .. } => EXIT_INVARIANT,
    }
}

fn outcome_text(o: &Outcome) -> String {
    let steps = o.trace().len();
    match o {
        Outcome::AllDone { value, .. } => format!("AllDone after {} steps: {}", steps, term_to_string(value)),
        Outcome::Deadlock { report, .. } => {
            let mut s = format!("Deadlock after {} steps", steps);
            for b in &report.blocked {
                s += &format!("\n  thread {} blocked on {} at {}", b.thread, b.api, b.endpoint);
            }
            for (t, why) in &report.stuck {
                s += &format!("\n  thread {} stuck: {}", t, why);
            }
            if let Some(a) = &report.analysis {
                s += &format!("\n  relaxed={} df_reducible={}", a.relaxed, a.df_reducible);
            }
            s
        }
        Outcome::StepLimit { .. } => format!("StepLimit after {} steps", steps),
        Outcome::InvariantViolation { which, step, .. } => format!("InvariantViolation at step {}: {}", step, which),
        Outcome::ScriptError { message, .. } => format!("ScriptError: {}", message),
    }
}

fn event_text(e: &TraceEvent) -> String {
    let mut s = format!(
        "{:>5} {:<6} {:<4} threads {:?}",
        e.step,
        e.kind,
        e.channel.as_deref().unwrap_or("-"),
        e.threads
    );
    if let Some(p) = &e.payload_type {
        s += &format!(" payload {}", p);
    }
    s
}

pub fn run(args: &RunArgs, mode: Mode) -> u8 {
    let opts = options(&args.check);
    let pool = match load(args, &opts) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let policy = match args.seed {
        Some(s) => SchedulerPolicy::SeededRandom(s),
        None => SchedulerPolicy::RoundRobin,
    };
    let limits = RunLimits {
        max_steps: args.max_steps,
        checked: args.checked,
        erase_proofs: args.erase_proofs,
        check_options: opts,
    };
    let mut snapshots = vec![];
    let outcome = run_observed(pool, policy, &limits, &mut |step, pool| {
        if mode == Mode::Analyze {
            snapshots.push(analysis(step, pool));
        }
    });
    let records = args.check.format == Format::Records;
    match mode {
        Mode::Outcome => {}
        Mode::Trace => {
            for e in outcome.trace() {
                if records {
                    println!("{}", serde_json::to_string(e).expect("events serialize"));
                } else {
                    println!("{}", event_text(e));
                }
            }
        }
        Mode::Analyze => {
            for (v, _) in &snapshots {
                if records {
                    println!("{}", v);
                } else {
                    println!(
                        "{:>5} relaxed={} df_reducible={} slack={}",
                        v["step"], v["relaxed"], v["df_reducible"], v["slack"]
                    );
                }
            }
            let min_slack = snapshots.iter().filter_map(|(_, s)| *s).min();
            let all = |key: &str| snapshots.iter().all(|(v, _)| v[key] == json!(true));
            let summary = json!({
                "summary": {
                    "snapshots": snapshots.len(),
                    "min_slack": min_slack,
                    "always_relaxed": all("relaxed"),
                    "always_reducible": all("df_reducible"),
                }
            });
            if records {
                println!("{}", summary);
            } else {
                let s = &summary["summary"];
                println!(
                    "summary: {} snapshots, min slack {}, always relaxed {}, always reducible {}",
                    s["snapshots"], s["min_slack"], s["always_relaxed"], s["always_reducible"]
                );
            }
        }
    }
    if records {
        println!("{}", outcome.record());
    } else {
        println!("{}", outcome_text(&outcome));
    }
    exit_code(&outcome)
}
