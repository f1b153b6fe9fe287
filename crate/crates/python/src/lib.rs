//! Python bindings for the `gt_converse` crate.

use gt_converse::adaptive::{self, SimConfig};
use gt_converse::bounds::{self, BoundQuery, BoundResult, CurveRow};
use gt_converse::entropy;
use gt_converse::oracle::{self, CheckRecord, SuiteConfig};
use gt_converse::{DefectModel as CoreModel, Error, TestMatrix as CoreMatrix};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn query(delta: f64, epsilon: f64) -> PyResult<BoundQuery> {
    BoundQuery::new(delta, epsilon).map_err(py_err)
}

/// Item defect model: each item is defective independently with probability `delta`.
#[pyclass(frozen, skip_from_py_object, name = "DefectModel")]
#[derive(Clone, Copy)]
struct DefectModel(CoreModel);

#[pymethods]
impl DefectModel {
    #[new]
    fn new(delta: f64) -> PyResult<Self> {
        CoreModel::new(delta).map(DefectModel).map_err(py_err)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.0.zeta()
    }

    #[getter]
    fn entropy(&self) -> f64 {
        self.0.entropy()
    }

    fn k0(&self) -> f64 {
        entropy::k0(&self.0)
    }

    fn p(&self, k: u32) -> f64 {
        entropy::p_dk(&self.0, k)
    }

    fn f(&self, k: u32, s: f64) -> f64 {
        entropy::f_dk(&self.0, k, s)
    }

    fn g(&self, k: u32, t: f64) -> f64 {
        entropy::g_dk(&self.0, k, t)
    }

    fn g_inverse(&self, k: u32, y: f64) -> PyResult<f64> {
        entropy::g_dk_inverse(&self.0, k, y).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("DefectModel(delta={})", self.0.delta())
    }
}

/// Non-adaptive test design: `rows[l]` lists the items pooled in test `l`.
#[pyclass(frozen, skip_from_py_object, name = "TestMatrix")]
#[derive(Clone)]
struct TestMatrix(CoreMatrix);

#[pymethods]
impl TestMatrix {
    #[new]
    fn new(n: usize, rows: Vec<Vec<usize>>) -> PyResult<Self> {
        CoreMatrix::new(n, rows).map(TestMatrix).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn t(&self) -> usize {
        self.0.t()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<usize>> {
        self.0.rows().to_vec()
    }

    fn constant_weight(&self) -> Option<usize> {
        self.0.constant_weight()
    }

    /// Exact entropy of the outcomes of `tests` (all tests when omitted).
    #[pyo3(signature = (model, tests=None))]
    fn joint_entropy(&self, model: &DefectModel, tests: Option<Vec<usize>>) -> PyResult<f64> {
        oracle::joint_entropy(&self.0, &model.0, tests.as_deref()).map_err(py_err)
    }

    /// Probability that every test in `tests` is positive, by inclusion-exclusion.
    fn prob_all_positive(&self, model: &DefectModel, tests: Vec<usize>) -> PyResult<f64> {
        oracle::prob_all_positive_incl_excl(&self.0, &tests, &model.0).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("TestMatrix({})", self.0)
    }
}

#[pyfunction]
fn binary_entropy(x: f64) -> PyResult<f64> {
    entropy::binary_entropy(x).map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, r: &BoundResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("kind", r.kind.name())?;
    d.set_item("value", r.value)?;
    d.set_item("argmin_k", r.argmin_k)?;
    d.set_item("k_scan_limit", r.k_scan_limit)?;
    d.set_item("applicable", r.applicable)?;
    Ok(d)
}

/// Every bound at one `(delta, epsilon)`, keyed by bound name.
#[pyfunction]
#[pyo3(name = "bounds", signature = (delta, epsilon=0.0))]
fn all_bounds<'py>(py: Python<'py>, delta: f64, epsilon: f64) -> PyResult<Bound<'py, PyDict>> {
    let q = query(delta, epsilon)?;
    let d = PyDict::new(py);
    d.set_item("counting", result_dict(py, &bounds::counting_bound(&q))?)?;
    d.set_item(
        "quantization",
        result_dict(py, &bounds::quantization_bound(&q))?,
    )?;
    d.set_item(
        "individual",
        result_dict(py, &bounds::individual_testing_bound(&q))?,
    )?;
    d.set_item(
        "main",
        result_dict(py, &bounds::main_bound(&q).map_err(py_err)?)?,
    )?;
    d.set_item(
        "adaptive_rate",
        result_dict(py, &bounds::adaptive_rate(&q.model))?,
    )?;
    d.set_item(
        "best_lower",
        result_dict(py, &bounds::best_lower_bound(&q))?,
    )?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (delta, epsilon=0.0))]
fn main_bound(delta: f64, epsilon: f64) -> PyResult<(f64, u32)> {
    let r = bounds::main_bound(&query(delta, epsilon)?).map_err(py_err)?;
    Ok((r.rate(), r.argmin_k.unwrap_or(1)))
}

#[pyfunction]
#[pyo3(signature = (delta, k, epsilon=0.0))]
fn per_k_bound(delta: f64, k: u32, epsilon: f64) -> PyResult<f64> {
    Ok(bounds::per_k_bound(&query(delta, epsilon)?, k)
        .map_err(py_err)?
        .rate())
}

#[pyfunction]
#[pyo3(signature = (epsilon=0.0))]
fn crossover_delta(epsilon: f64) -> PyResult<f64> {
    bounds::crossover_delta(epsilon).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (epsilon=0.0))]
fn adaptivity_gap(epsilon: f64) -> PyResult<(f64, f64)> {
    bounds::adaptivity_gap(epsilon).map_err(py_err)
}

fn row_dict<'py>(py: Python<'py>, r: &CurveRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("delta", r.delta)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("counting", r.counting)?;
    d.set_item("quantization", r.quantization)?;
    d.set_item("individual", r.individual)?;
    d.set_item("main", r.main)?;
    d.set_item("main_argmin_k", r.main_argmin_k)?;
    d.set_item("adaptive_rate", r.adaptive_rate)?;
    d.set_item("best_lower", r.best_lower)?;
    d.set_item("gap_flag", r.gap_flag)?;
    Ok(d)
}

/// One dict per grid point, with the CSV column names as keys.
#[pyfunction]
#[pyo3(signature = (deltas, epsilon=0.0))]
fn sweep<'py>(
    py: Python<'py>,
    deltas: Vec<f64>,
    epsilon: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py.detach(|| bounds::sweep(&deltas, epsilon));
    rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pyfunction]
#[pyo3(signature = (n, delta, trials=400, seed=7))]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    delta: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SimConfig::new(n, delta, trials, seed).map_err(py_err)?;
    let r = py.detach(|| adaptive::simulate(&cfg));
    let d = PyDict::new(py);
    d.set_item("mean_tests_per_item", r.mean_tests_per_item)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("formula_value", r.formula_value)?;
    d.set_item("z_score", r.z_score())?;
    d.set_item("error_count", r.error_count)?;
    d.set_item("total_tests", r.total_tests)?;
    Ok(d)
}

fn record_tuple(r: &CheckRecord) -> (String, f64, f64, bool) {
    (format!("{}@{}", r.name, r.digest), r.lhs, r.rhs, r.passed())
}

/// `(exact joint entropy, per-design bound)` for a design whose tests share an item.
#[pyfunction]
fn verify_thm3(m: &TestMatrix, model: &DefectModel) -> PyResult<(f64, f64)> {
    let r = oracle::verify_thm3(&m.0, &model.0).map_err(py_err)?;
    Ok((r.exact, r.bound))
}

/// `(joint entropy, fractional-cover sum)` for a constant-weight design.
#[pyfunction]
fn verify_mt_weak(m: &TestMatrix, model: &DefectModel) -> PyResult<(f64, f64)> {
    let r = oracle::verify_mt_weak(&m.0, &model.0).map_err(py_err)?;
    Ok((r.lhs, r.rhs))
}

/// Runs the full oracle suite; returns `(name@digest, lhs, rhs, passed)` per check.
#[pyfunction]
#[pyo3(signature = (max_n=12, seed=0x5eed, tolerance=1e-12, fuzz_cases=500))]
fn verify(
    py: Python<'_>,
    max_n: usize,
    seed: u64,
    tolerance: f64,
    fuzz_cases: usize,
) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let cfg = SuiteConfig {
        max_n,
        seed,
        tolerance,
        fuzz_cases,
        ..SuiteConfig::default()
    };
    let report = py.detach(|| oracle::run_suite(&cfg)).map_err(py_err)?;
    Ok(report.records.iter().map(record_tuple).collect())
}

#[pymodule]
fn gtbounds(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DELTA_STAR", bounds::DELTA_STAR)?;
    m.add_class::<DefectModel>()?;
    m.add_class::<TestMatrix>()?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(all_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(main_bound, m)?)?;
    m.add_function(wrap_pyfunction!(per_k_bound, m)?)?;
    m.add_function(wrap_pyfunction!(crossover_delta, m)?)?;
    m.add_function(wrap_pyfunction!(adaptivity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_thm3, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mt_weak, m)?)?;
    Ok(())
}
