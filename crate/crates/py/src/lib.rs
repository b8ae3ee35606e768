//! Python module `kolmo`: terms, budgeted evaluation, complexity scans, the
//! a priori table, and the companion experiments.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use kolmo::apriori::{default_candidates, peak_report, SemimeasureTable, Window};
use kolmo::codec::{decode_program, encode_term, Program};
use kolmo::complexity::{k_exp as core_k_exp, kolmogorov_order, lz_upper_bound as core_lz};
use kolmo::empiric::{
    extract_numbers as core_extract, spurious_scan as core_scan, BaseRates, ScanParams, TestKind,
};
use kolmo::nbody::{
    circular_binary, divergence_probe as core_probe, integrate as core_integrate, pythagorean,
    Gravity, IntegrateOptions, Method, PhaseState, ProbeOptions, SystemConfig,
};
use kolmo::recfun::{eval, parse_term, EvalOutcome, Term, UndefinedReason};
use kolmo::Nat;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable report into plain Python objects.
fn to_python<T: Serialize>(py: Python<'_>, data: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(data).map_err(value_error)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn outcome_dict<'py>(py: Python<'py>, outcome: &EvalOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("steps", outcome.steps())?;
    match outcome {
        EvalOutcome::Value { value, .. } => {
            d.set_item("status", "value")?;
            d.set_item("value", value.to_biguint())?;
        }
        EvalOutcome::BudgetExhausted { .. } => {
            d.set_item("status", "exhausted")?;
            d.set_item("value", py.None())?;
        }
        EvalOutcome::Undefined { reason, .. } => {
            d.set_item("status", "undefined")?;
            d.set_item("value", py.None())?;
            let why = match reason {
                UndefinedReason::NoRoot => "no root".to_string(),
                UndefinedReason::InvalidProgram(m) => m.clone(),
            };
            d.set_item("reason", why)?;
        }
    }
    Ok(d)
}

/// A partial recursive function term, e.g. `Term("C[S; Z(3)]")`.
#[pyclass(name = "Term", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyTerm {
    inner: Term,
}

#[pymethods]
impl PyTerm {
    #[new]
    fn new(src: &str) -> PyResult<Self> {
        parse_term(src)
            .map(|inner| PyTerm { inner })
            .map_err(value_error)
    }

    /// The program with index `m` (the binary expansion of `m` minus its leading 1).
    #[staticmethod]
    fn from_index(m: BigUint) -> PyResult<Self> {
        if m == BigUint::ZERO {
            return Err(PyValueError::new_err("indices start at 1"));
        }
        decode_program(&Program::from_index(&m))
            .map(|inner| PyTerm { inner })
            .map_err(value_error)
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    /// Length of the prefix-free encoding, in bits.
    fn encoded_len(&self) -> usize {
        encode_term(&self.inner).len()
    }

    fn bits(&self) -> String {
        encode_term(&self.inner).bits.to_string()
    }

    fn index(&self) -> BigUint {
        encode_term(&self.inner).index()
    }

    /// Evaluates on `args` with at most `budget` steps.
    #[pyo3(signature = (args = Vec::new(), budget = 10_000))]
    fn eval<'py>(
        &self,
        py: Python<'py>,
        args: Vec<BigUint>,
        budget: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let args: Vec<Nat> = args.into_iter().map(Nat::from).collect();
        let outcome = eval(&self.inner, &args, budget).map_err(value_error)?;
        outcome_dict(py, &outcome)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", self.inner.to_string())
    }
}

#[pyfunction]
fn layout_hash() -> String {
    kolmo::codec::layout_hash()
}

/// Least index `m <= m_max` whose program prints `x` within the budget.
#[pyfunction]
#[pyo3(signature = (x, budget = 10_000, m_max = 1 << 22))]
fn k_exp(py: Python<'_>, x: BigUint, budget: u64, m_max: u64) -> PyResult<Py<PyAny>> {
    if budget == 0 || m_max == 0 {
        return Err(PyValueError::new_err("budget and m_max must be positive"));
    }
    let x = Nat::from(x);
    let rec = py.detach(|| core_k_exp(&x, budget, m_max));
    to_python(py, &rec)
}

#[pyfunction]
#[pyo3(signature = (n, budget = 10_000))]
fn order(py: Python<'_>, n: u64, budget: u64) -> PyResult<Py<PyAny>> {
    if n == 0 || budget == 0 {
        return Err(PyValueError::new_err("n and budget must be positive"));
    }
    let seg = py.detach(|| kolmogorov_order(n, budget));
    to_python(py, &seg)
}

#[pyfunction]
fn lz_upper_bound(py: Python<'_>, data: &[u8]) -> PyResult<Py<PyAny>> {
    to_python(py, &core_lz(data))
}

/// Budgeted lower approximation of the a priori semimeasure.
#[pyclass(name = "Semimeasure", frozen)]
struct PySemimeasure {
    table: SemimeasureTable,
}

#[pymethods]
impl PySemimeasure {
    #[new]
    #[pyo3(signature = (max_bits, budget = 10_000))]
    fn new(py: Python<'_>, max_bits: u32, budget: u64) -> PyResult<Self> {
        let mut table = SemimeasureTable::new(max_bits, budget).map_err(value_error)?;
        py.detach(|| table.run_with(|_| Ok(())))
            .map_err(value_error)?;
        Ok(PySemimeasure { table })
    }

    fn prob(&self, x: BigUint) -> f64 {
        self.table.prob(&Nat::from(x)).to_f64()
    }

    /// `(numerator, log2 denominator)` of the exact mass.
    fn prob_exact(&self, x: BigUint) -> (u128, u32) {
        let m = self.table.prob(&Nat::from(x));
        (m.numerator(), m.log2_den())
    }

    #[getter]
    fn total(&self) -> f64 {
        self.table.total.to_f64()
    }

    fn __len__(&self) -> usize {
        self.table.mass.len()
    }

    fn to_jsonl(&self) -> String {
        self.table.to_jsonl()
    }

    #[pyo3(signature = (candidates = None, window = 0.05))]
    fn peaks(
        &self,
        py: Python<'_>,
        candidates: Option<Vec<BigUint>>,
        window: f64,
    ) -> PyResult<Py<PyAny>> {
        if !(window > 0.0 && window < 1.0) {
            return Err(PyValueError::new_err("window must lie in (0, 1)"));
        }
        let candidates = match candidates {
            Some(c) => c.into_iter().map(Nat::from).collect(),
            None => default_candidates(),
        };
        to_python(
            py,
            &peak_report(&self.table.mass, &candidates, Window::Relative(window)),
        )
    }
}

/// `{integer: mentions}` for the numerals in `text`.
#[pyfunction]
fn extract_numbers(text: &str) -> std::collections::BTreeMap<BigUint, u64> {
    core_extract(text)
        .counts
        .into_iter()
        .map(|(x, c)| (x.to_biguint(), c))
        .collect()
}

#[pyfunction]
#[pyo3(signature = (population = 100_000, groups = 12, outcomes = 200, alpha = 0.05, seed = 42, rate_lo = 1e-4, rate_hi = 1e-2, test = "yates"))]
#[allow(clippy::too_many_arguments)]
fn spurious_scan(
    py: Python<'_>,
    population: u64,
    groups: u32,
    outcomes: u32,
    alpha: f64,
    seed: u64,
    rate_lo: f64,
    rate_hi: f64,
    test: &str,
) -> PyResult<Py<PyAny>> {
    let mut params = ScanParams::new(population, groups, outcomes, alpha, seed);
    params.base_rates = BaseRates::LogUniform {
        lo: rate_lo,
        hi: rate_hi,
    };
    params.test = match test {
        "yates" => TestKind::Yates,
        "z" => TestKind::Z,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown test {other:?} (yates, z)"
            )))
        }
    };
    let r = py.detach(|| core_scan(&params)).map_err(value_error)?;
    to_python(py, &r)
}

/// `"circular"`, `"pythagorean"`, or a JSON system description.
fn load_system(source: &str) -> PyResult<(PhaseState, Gravity)> {
    match source {
        "circular" => Ok((circular_binary(), Gravity::default())),
        "pythagorean" => Ok((pythagorean(), Gravity::default())),
        json => {
            let cfg: SystemConfig = serde_json::from_str(json).map_err(value_error)?;
            Ok((
                cfg.state().map_err(value_error)?,
                cfg.gravity().map_err(value_error)?,
            ))
        }
    }
}

#[pyfunction]
#[pyo3(signature = (system, dt = 1e-3, steps = 1000, method = "leapfrog", stride = 1))]
fn integrate(
    py: Python<'_>,
    system: &str,
    dt: f64,
    steps: u64,
    method: &str,
    stride: u64,
) -> PyResult<Py<PyAny>> {
    let (state, gravity) = load_system(system)?;
    let method: Method = method.parse().map_err(PyValueError::new_err)?;
    let mut opts = IntegrateOptions::new(dt, steps, method);
    opts.stride = stride;
    opts.gravity = gravity;
    let traj = py
        .detach(|| core_integrate(&state, &opts, None))
        .map_err(value_error)?;
    to_python(py, &traj)
}

#[pyfunction]
#[pyo3(signature = (system, delta = 1e-9, horizon = 60.0, dt = 1e-4))]
fn divergence_probe(
    py: Python<'_>,
    system: &str,
    delta: f64,
    horizon: f64,
    dt: f64,
) -> PyResult<Py<PyAny>> {
    let (state, gravity) = load_system(system)?;
    let mut opts = ProbeOptions::new(delta, horizon, dt);
    opts.gravity = gravity;
    let report = py
        .detach(|| core_probe(&state, &opts))
        .map_err(value_error)?;
    to_python(py, &report)
}

#[pymodule]
#[pyo3(name = "kolmo")]
fn kolmo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTerm>()?;
    m.add_class::<PySemimeasure>()?;
    m.add_function(wrap_pyfunction!(layout_hash, m)?)?;
    m.add_function(wrap_pyfunction!(k_exp, m)?)?;
    m.add_function(wrap_pyfunction!(order, m)?)?;
    m.add_function(wrap_pyfunction!(lz_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(extract_numbers, m)?)?;
    m.add_function(wrap_pyfunction!(spurious_scan, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_probe, m)?)?;
    Ok(())
}
