//! Python bindings: `check`, `run`, `analyze`, `entails` and
//! `reducibility`, each returning plain dicts and lists.

pub mod ops;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// Converts through Python's `json` module, which keeps the binding free of
/// per-type conversion code.
fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

#[pyfunction]
#[pyo3(signature = (source, assert_runtime = false, solver_budget = None))]
fn check(py: Python<'_>, source: &str, assert_runtime: bool, solver_budget: Option<u64>) -> PyResult<Py<PyAny>> {
    to_py(py, &ops::check(source, assert_runtime, solver_budget))
}

fn config(seed: Option<u64>, max_steps: Option<usize>, checked: bool, erase_proofs: bool, assert_runtime: bool) -> ops::RunConfig {
    ops::RunConfig {
        seed,
        max_steps,
        checked,
        erase_proofs,
        assert_runtime,
    }
}

/// Checks and runs a program; raises `ValueError` when it is rejected.
#[pyfunction]
#[pyo3(signature = (source, seed = None, max_steps = None, checked = false, erase_proofs = false, assert_runtime = false))]
fn run(
    py: Python<'_>,
    source: &str,
    seed: Option<u64>,
    max_steps: Option<usize>,
    checked: bool,
    erase_proofs: bool,
    assert_runtime: bool,
) -> PyResult<Py<PyAny>> {
    let cfg = config(seed, max_steps, checked, erase_proofs, assert_runtime);
    let v = ops::run(source, &cfg).map_err(PyValueError::new_err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (source, seed = None, max_steps = None))]
fn analyze(py: Python<'_>, source: &str, seed: Option<u64>, max_steps: Option<usize>) -> PyResult<Py<PyAny>> {
    let cfg = config(seed, max_steps, false, false, false);
    let v = ops::analyze(source, &cfg).map_err(PyValueError::new_err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (goal, props = vec![], universe = None, set_vars = vec![], int_vars = vec![], bool_vars = vec![], budget = None))]
#[allow(clippy::too_many_arguments)]
fn entails(
    py: Python<'_>,
    goal: String,
    props: Vec<String>,
    universe: Option<Vec<i64>>,
    set_vars: Vec<String>,
    int_vars: Vec<String>,
    bool_vars: Vec<String>,
    budget: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let p = ops::Problem {
        goal,
        props,
        universe,
        set_vars,
        int_vars,
        bool_vars,
        budget,
    };
    let v = ops::entailment(&p).map_err(PyValueError::new_err)?;
    to_py(py, &v)
}

/// `sets` is a list of endpoint sets, each a list of `(channel, roles)`.
#[pyfunction]
fn reducibility(py: Python<'_>, sets: Vec<Vec<(u64, Vec<i64>)>>) -> PyResult<Py<PyAny>> {
    to_py(py, &ops::reducibility(&sets))
}

#[pymodule]
fn dsess_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(entails, m)?)?;
    m.add_function(wrap_pyfunction!(reducibility, m)?)?;
    Ok(())
}
