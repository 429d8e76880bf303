//! Schedulers and the run loop.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pool::{apply, find_enabled, sig_summary, thread_state, EnabledStep, ThreadState};
use super::{consistent, Pool};
use crate::dfcheck::{abstract_pool, df_reducible_graph, Snapshot};
use crate::syntax::ast::*;
use crate::syntax::term_to_string;
use crate::typing::{typecheck_pool, CheckOptions};

/// Selects one step among those enabled. Fields left `None` match anything.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDirective {
    pub kind: Option<String>,
    pub thread: Option<usize>,
    pub channel: Option<u64>,
}

impl StepDirective {
    fn matches(&self, s: &EnabledStep) -> bool {
        self.kind.as_deref().is_none_or(|k| k == s.kind.as_str())
            && self.thread.is_none_or(|t| s.threads.contains(&t))
            && self.channel.is_none_or(|c| s.channel == Some(ChannelId(c)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchedulerPolicy {
    RoundRobin,
    SeededRandom(u64),
    /// Directives are consumed in order; round-robin takes over once they
    /// run out.
    Scripted(Vec<StepDirective>),
}

pub struct Scheduler {
    policy: SchedulerPolicy,
    rng: ChaCha8Rng,
    cursor: usize,
    script_pos: usize,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy) -> Scheduler {
        let seed = match policy {
            SchedulerPolicy::SeededRandom(s) => s,
            _ => 0,
        };
        Scheduler {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cursor: 0,
            script_pos: 0,
        }
    }

    /// Index into `enabled` (which must be non-empty) of the step to take.
    pub fn choose(&mut self, enabled: &[EnabledStep]) -> Result<usize, String> {
        match &self.policy {
            SchedulerPolicy::SeededRandom(_) => Ok(self.rng.gen_range(0..enabled.len())),
            SchedulerPolicy::Scripted(script) if self.script_pos < script.len() => {
                let d = &script[self.script_pos];
                self.script_pos += 1;
                enabled
                    .iter()
                    .position(|s| d.matches(s))
                    .ok_or_else(|| format!("directive {} ({:?}) names no enabled step", self.script_pos, d))
            }
            _ => {
                // the first step at or after the cursor thread, wrapping around
                let first = |s: &EnabledStep| s.threads.first().copied().unwrap_or(0);
                let pick = (0..enabled.len())
                    .filter(|&i| first(&enabled[i]) >= self.cursor)
                    .min_by_key(|&i| first(&enabled[i]))
                    .or_else(|| (0..enabled.len()).min_by_key(|&i| first(&enabled[i])))
                    .expect("enabled is non-empty");
                self.cursor = first(&enabled[pick]) + 1;
                Ok(pick)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunLimits {
    pub max_steps: usize,
    /// Assert consistency, pool typing and reducibility after every step.
    pub checked: bool,
    pub erase_proofs: bool,
    pub check_options: CheckOptions,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: 100_000,
            checked: false,
            erase_proofs: false,
            check_options: CheckOptions::default(),
        }
    }
}

/// One pool step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub kind: String,
    pub channel: Option<String>,
    pub threads: Vec<usize>,
    pub payload_type: Option<String>,
    pub sig_before: BTreeMap<String, String>,
    pub sig_after: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockedThread {
    pub thread: usize,
    pub api: String,
    pub endpoint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeadlockReport {
    pub blocked: Vec<BlockedThread>,
    /// Threads with no applicable rule at all.
    pub stuck: Vec<(usize, String)>,
    pub analysis: Option<Snapshot>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    AllDone { value: DynTerm, trace: Vec<TraceEvent> },
    Deadlock { report: DeadlockReport, trace: Vec<TraceEvent> },
    StepLimit { trace: Vec<TraceEvent> },
    InvariantViolation { which: String, step: usize, trace: Vec<TraceEvent> },
    /// A scripted directive named no enabled step.
    ScriptError { message: String, trace: Vec<TraceEvent> },
}

impl Outcome {
    pub fn trace(&self) -> &[TraceEvent] {
        match self {
            Outcome::AllDone { trace, .. }
            | Outcome::Deadlock { trace, .. }
            | Outcome::StepLimit { trace }
            | Outcome::InvariantViolation { trace, .. }
            | Outcome::ScriptError { trace, .. } => trace,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self, Outcome::AllDone { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::AllDone { .. } => "AllDone",
            Outcome::Deadlock { .. } => "Deadlock",
            Outcome::StepLimit { .. } => "StepLimit",
            Outcome::InvariantViolation { .. } => "InvariantViolation",
            Outcome::ScriptError { .. } => "ScriptError",
        }
    }

    /// `{outcome, steps, ...}` with the fields particular to each outcome;
    /// the trace itself is left out.
    pub fn record(&self) -> serde_json::Value {
        let mut v = serde_json::json!({"outcome": self.name(), "steps": self.trace().len()});
        match self {
            Outcome::AllDone { value, .. } => v["value"] = term_to_string(value).into(),
            Outcome::Deadlock { report, .. } => {
                v["blocked"] = serde_json::to_value(&report.blocked).expect("reports serialize");
                v["stuck"] = serde_json::to_value(&report.stuck).expect("reports serialize");
                v["analysis"] = serde_json::to_value(&report.analysis).expect("reports serialize");
            }
            Outcome::InvariantViolation { which, step, .. } => {
                v["which"] = which.as_str().into();
                v["step"] = (*step).into();
            }
            Outcome::ScriptError { message, .. } => v["message"] = message.as_str().into(),
            Outcome::StepLimit { .. } => {}
        }
        v
    }
}

pub(crate) fn deadlock_report(pool: &Pool) -> DeadlockReport {
    let mut blocked = vec![];
    let mut stuck = vec![];
    for (t, e) in &pool.threads {
        match thread_state(e) {
            ThreadState::Waiting(w) => blocked.push(BlockedThread {
                thread: *t,
                api: w.api.as_str().to_string(),
                endpoint: w.endpoint.to_string(),
            }),
            ThreadState::Stuck(m) => stuck.push((*t, m)),
            _ => {}
        }
    }
    DeadlockReport {
        blocked,
        stuck,
        analysis: abstract_pool(pool).ok().map(|m| Snapshot::of(0, &m)),
    }
}

/// The invariant that fails on `pool`, if any.
fn check_invariants(pool: &Pool, limits: &RunLimits) -> Option<String> {
    if !consistent(&pool.resources(), &pool.universes()) {
        return Some("consistency".into());
    }
    if !limits.erase_proofs {
        if let Err(d) = typecheck_pool(&pool.threads, &pool.sig, &limits.check_options) {
            return Some(format!("typing: {}", d));
        }
    }
    match abstract_pool(pool) {
        Ok(m) if df_reducible_graph(&m) => None,
        _ => Some("df-reducibility".into()),
    }
}

pub fn run(initial: Pool, policy: SchedulerPolicy, limits: &RunLimits) -> Outcome {
    run_observed(initial, policy, limits, &mut |_, _| {})
}

/// Like [`run`], calling `observe` with the step number and the pool before
/// every step and once more on the final pool.
pub fn run_observed(
    initial: Pool,
    policy: SchedulerPolicy,
    limits: &RunLimits,
    observe: &mut dyn FnMut(usize, &Pool),
) -> Outcome {
    let mut pool = initial;
    let mut sched = Scheduler::new(policy);
    let mut trace = vec![];
    for step in 0..=limits.max_steps {
        if limits.checked {
            if let Some(which) = check_invariants(&pool, limits) {
                return Outcome::InvariantViolation { which, step, trace };
            }
        }
        observe(step, &pool);
        if pool.is_done() {
            let value = pool.threads.remove(&0).expect("thread 0 is present");
            return Outcome::AllDone { value, trace };
        }
        let enabled = find_enabled(&pool, limits.erase_proofs);
        if enabled.is_empty() {
            if limits.checked {
                return Outcome::InvariantViolation {
                    which: "progress".into(),
                    step,
                    trace,
                };
            }
            return Outcome::Deadlock {
                report: deadlock_report(&pool),
                trace,
            };
        }
        if step == limits.max_steps {
            break;
        }
        let pick = match sched.choose(&enabled) {
            Ok(i) => i,
            Err(message) => return Outcome::ScriptError { message, trace },
        };
        let chosen = &enabled[pick];
        let sig_before = sig_summary(&pool);
        let applied = match apply(&mut pool, chosen, limits.erase_proofs) {
            Ok(a) => a,
            Err(m) => {
                return Outcome::InvariantViolation {
                    which: format!("step: {}", m),
                    step,
                    trace,
                }
            }
        };
        trace.push(TraceEvent {
            step,
            kind: chosen.kind.as_str().to_string(),
            channel: chosen.channel.map(|c| c.to_string()),
            threads: chosen.threads.clone(),
            payload_type: applied.payload_type,
            sig_before,
            sig_after: sig_summary(&pool),
        });
    }
    Outcome::StepLimit { trace }
}
