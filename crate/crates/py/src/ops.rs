//! The binding's operations as plain Rust, returning JSON values.

use std::collections::BTreeSet;

use dsess::dfcheck::{abstract_pool, df_reducible, df_reducible_graph, relaxed, Collection, Snapshot};
use dsess::runtime::{run_observed, Pool, RunLimits, SchedulerPolicy};
use dsess::solver::{entails, Assumptions, Verdict};
use dsess::syntax::{parse_static, type_to_string, ChannelId, Endpoint};
use dsess::typing::{check_source, CheckOptions, CheckedProgram};
use serde_json::{json, Value};

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub checked: bool,
    pub erase_proofs: bool,
    pub assert_runtime: bool,
}

fn options(assert_runtime: bool, solver_budget: Option<u64>) -> CheckOptions {
    let mut o = CheckOptions {
        assert_runtime,
        ..CheckOptions::default()
    };
    if let Some(b) = solver_budget {
        o.solver_budget = b;
    }
    o
}

fn diagnostic(d: &dsess::typing::Diagnostic) -> Value {
    serde_json::from_str(&d.to_json()).expect("diagnostics are JSON")
}

/// `{ok, main_type}` or `{ok: false, diagnostic}`.
pub fn check(source: &str, assert_runtime: bool, solver_budget: Option<u64>) -> Value {
    match check_source(source, &options(assert_runtime, solver_budget)) {
        Ok(c) => json!({"ok": true, "main_type": type_to_string(&c.main_type)}),
        Err(d) => json!({"ok": false, "diagnostic": diagnostic(&d)}),
    }
}

fn checked(source: &str, cfg: &RunConfig) -> Result<CheckedProgram, String> {
    check_source(source, &options(cfg.assert_runtime, None)).map_err(|d| d.to_string())
}

fn limits(cfg: &RunConfig) -> RunLimits {
    let mut l = RunLimits {
        checked: cfg.checked,
        erase_proofs: cfg.erase_proofs,
        check_options: options(cfg.assert_runtime, None),
        ..RunLimits::default()
    };
    if let Some(m) = cfg.max_steps {
        l.max_steps = m;
    }
    l
}

fn policy(cfg: &RunConfig) -> SchedulerPolicy {
    cfg.seed.map_or(SchedulerPolicy::RoundRobin, SchedulerPolicy::SeededRandom)
}

/// The outcome record with the full trace under `trace`.
pub fn run(source: &str, cfg: &RunConfig) -> Result<Value, String> {
    let prog = checked(source, cfg)?;
    let o = run_observed(Pool::from_program(&prog), policy(cfg), &limits(cfg), &mut |_, _| {});
    let mut v = o.record();
    v["trace"] = serde_json::to_value(o.trace()).expect("events serialize");
    Ok(v)
}

/// One snapshot per pool visited.
pub fn analyze(source: &str, cfg: &RunConfig) -> Result<Value, String> {
    let prog = checked(source, cfg)?;
    let mut snaps = vec![];
    run_observed(Pool::from_program(&prog), policy(cfg), &limits(cfg), &mut |step, pool| {
        if let Ok(m) = abstract_pool(pool) {
            snaps.push(Snapshot::of(step, &m));
        }
    });
    Ok(serde_json::to_value(snaps).expect("snapshots serialize"))
}

#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub goal: String,
    pub props: Vec<String>,
    pub universe: Option<Vec<i64>>,
    pub set_vars: Vec<String>,
    pub int_vars: Vec<String>,
    pub bool_vars: Vec<String>,
    pub budget: Option<u64>,
}

/// `{verdict, counterexample?, reason?}`; set variables range over the
/// universe, which is then required.
pub fn entailment(p: &Problem) -> Result<Value, String> {
    let parse = |s: &str| parse_static(s).map_err(|e| format!("`{}`: {}", s, e));
    let mut a = Assumptions::new();
    if let Some(u) = &p.universe {
        a = a.with_universe(u);
    }
    if !p.set_vars.is_empty() {
        let u = p.universe.as_deref().ok_or("set variables need a universe")?;
        for s in &p.set_vars {
            a = a.set_var(s, u);
        }
    }
    for n in &p.int_vars {
        a = a.int_var(n);
    }
    for b in &p.bool_vars {
        a = a.bool_var(b);
    }
    for prop in &p.props {
        a = a.prop(parse(prop)?);
    }
    if let Some(b) = p.budget {
        a = a.budget(b);
    }
    Ok(match entails(&a, &parse(&p.goal)?) {
        Verdict::Valid => json!({"verdict": "valid"}),
        Verdict::Invalid(cex) => {
            let cex: serde_json::Map<String, Value> = cex.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect();
            json!({"verdict": "invalid", "counterexample": cex})
        }
        Verdict::Unknown(r) => json!({"verdict": "unknown", "reason": r}),
    })
}

/// Sets of `(channel, roles)` endpoints.
pub fn reducibility(sets: &[Vec<(u64, Vec<i64>)>]) -> Value {
    let m = Collection::new(
        sets.iter()
            .map(|s| s.iter().map(|(c, rs)| Endpoint::new(ChannelId(*c), rs.clone())).collect::<BTreeSet<_>>())
            .collect(),
    );
    json!({
        "relaxed": relaxed(&m),
        "df_reducible": df_reducible(&m),
        "df_reducible_graph": df_reducible_graph(&m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HELLO: &str = include_str!("../../../corpus/hello.mps");

    #[test]
    fn check_reports_both_ways() {
        assert_eq!(check(HELLO, false, None), json!({"ok": true, "main_type": "unit"}));
        let bad = check(&HELLO.replace("brecv(c)", "recv(c)"), false, None);
        assert_eq!(bad["diagnostic"]["code"], "protocol-head-mismatch");
    }

    #[test]
    fn run_and_analyze_hello() {
        let cfg = RunConfig {
            seed: Some(3),
            checked: true,
            ..RunConfig::default()
        };
        let r = run(HELLO, &cfg).unwrap();
        assert_eq!(r["outcome"], "AllDone");
        assert_eq!(r["trace"].as_array().unwrap().len() as u64, r["steps"].as_u64().unwrap());
        let a = analyze(HELLO, &cfg).unwrap();
        assert!(a.as_array().unwrap().iter().all(|s| s["df_reducible"] == true));
        assert!(run("main = oops;", &cfg).is_err());
    }

    #[test]
    fn entailment_verdicts() {
        let p = Problem {
            goal: "0 in s".into(),
            props: vec!["s = {0, 1}".into()],
            universe: Some(vec![0, 1, 2]),
            set_vars: vec!["s".into()],
            ..Problem::default()
        };
        assert_eq!(entailment(&p).unwrap()["verdict"], "valid");
        let p = Problem {
            goal: "n < 3".into(),
            int_vars: vec!["n".into()],
            ..Problem::default()
        };
        let v = entailment(&p).unwrap();
        assert_eq!(v["verdict"], "invalid");
        let n: i64 = v["counterexample"]["n"].as_str().unwrap().parse().unwrap();
        assert!(n >= 3);
    }

    #[test]
    fn crossed_sets_are_irreducible() {
        let v = reducibility(&[vec![(0, vec![0]), (1, vec![1])], vec![(0, vec![1]), (1, vec![0])]]);
        assert_eq!(v, json!({"relaxed": false, "df_reducible": false, "df_reducible_graph": false}));
    }
}
