//! Python bindings. Structured results are returned as plain dicts with the
//! same layout as the JSON report.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use hadamard_bench::convexity::{check_convex_coords, check_quasiconvex_coords, check_quasiconvex_joint, CheckOptions};
use hadamard_bench::harness::{builtin_corpus, run_suite, select_entries, Config, CorpusEntry};
use hadamard_bench::inequality::{self, BoundVariant};
use hadamard_bench::mappings::{self, GForm, MappingKind};
use hadamard_bench::quad::integrate2d;
use hadamard_bench::{calculus, Error, QuadOptions, Settings, Var};

create_exception!(
    pyhadamard,
    HypothesisError,
    pyo3::exceptions::PyException,
    "An inequality's hypothesis could not be established."
);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::HypothesisViolated { .. } => HypothesisError::new_err(e.to_string()),
        Error::Parse(_) | Error::Rect(_) | Error::InvalidArgument(_) | Error::Config(_) | Error::Diff(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn var(name: &str) -> PyResult<Var> {
    match name {
        "x" => Ok(Var::X),
        "y" => Ok(Var::Y),
        other => Err(PyValueError::new_err(format!(
            "variable must be 'x' or 'y', got '{other}'"
        ))),
    }
}

fn settings(tol: f64, trials: usize, seed: u64) -> Settings {
    let mut s = Settings {
        quad: QuadOptions::with_tol(tol),
        ..Default::default()
    };
    s.check.trials = trials;
    s.check.seed = seed;
    s
}

/// A bivariate expression in `x` and `y`.
#[pyclass(name = "Expr", module = "pyhadamard", frozen)]
struct PyExpr {
    inner: hadamard_bench::Expr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = hadamard_bench::parse(text).map_err(|e| py_err(e.into()))?;
        Ok(PyExpr { inner })
    }

    fn eval(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.eval(x, y).map_err(|e| py_err(e.into()))
    }

    fn differentiate(&self, var_name: &str) -> PyResult<PyExpr> {
        let inner = self.inner.differentiate(var(var_name)?).map_err(|e| py_err(e.into()))?;
        Ok(PyExpr { inner })
    }

    /// `f_xy`, differentiating in `x` first.
    fn mixed_partial(&self) -> PyResult<PyExpr> {
        let inner = calculus::mixed_partial(&self.inner).map_err(|e| py_err(e.into()))?;
        Ok(PyExpr { inner })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner)
    }

    fn __eq__(&self, other: &PyExpr) -> bool {
        self.inner == other.inner
    }
}

/// The rectangle `[a, b] x [c, d]` with `a < b`, `c < d`.
#[pyclass(name = "Rect", module = "pyhadamard", frozen)]
struct PyRect {
    inner: hadamard_bench::Rect,
}

#[pymethods]
impl PyRect {
    #[new]
    fn new(a: f64, b: f64, c: f64, d: f64) -> PyResult<Self> {
        let inner = hadamard_bench::Rect::new(a, b, c, d).map_err(|e| py_err(e.into()))?;
        Ok(PyRect { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = text
            .parse()
            .map_err(|e: hadamard_bench::quad::RectError| py_err(e.into()))?;
        Ok(PyRect { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d()
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn __repr__(&self) -> String {
        format!(
            "Rect({}, {}, {}, {})",
            self.inner.a(),
            self.inner.b(),
            self.inner.c(),
            self.inner.d()
        )
    }
}

/// `(value, error_estimate)` of the integral of `f` over `r`.
#[pyfunction]
#[pyo3(signature = (f, r, tol = 1e-9))]
fn integrate(f: &PyExpr, r: &PyRect, tol: f64) -> PyResult<(f64, f64)> {
    let q =
        integrate2d(|x, y| f.inner.eval(x, y), &r.inner, &QuadOptions::with_tol(tol)).map_err(|e| py_err(e.into()))?;
    Ok((q.value, q.error_estimate))
}

#[pyfunction]
#[pyo3(signature = (f, r, tol = 1e-9))]
fn trapezoid_gap<'py>(py: Python<'py>, f: &PyExpr, r: &PyRect, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let g = inequality::trapezoid_gap(&f.inner, &r.inner, &QuadOptions::with_tol(tol)).map_err(py_err)?;
    to_py(py, &g)
}

#[pyfunction]
#[pyo3(signature = (f, r, tol = 1e-9))]
fn lemma1_residual<'py>(py: Python<'py>, f: &PyExpr, r: &PyRect, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let res = inequality::lemma1_residual(&f.inner, &r.inner, &QuadOptions::with_tol(tol)).map_err(py_err)?;
    to_py(py, &res)
}

fn variant(name: &str, p: f64, q: f64) -> PyResult<BoundVariant> {
    Ok(match name {
        "abs" => BoundVariant::Abs,
        "holder" => BoundVariant::Holder { p },
        "holder-relaxed" => BoundVariant::HolderRelaxed { p },
        "power-mean" => BoundVariant::PowerMean { q },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown variant '{other}' (abs, holder, holder-relaxed, power-mean)"
            )))
        }
    })
}

/// Checks one bound on `|gap|`; raises `HypothesisError` when `|f_xy|^q` is not
/// found quasi-convex on the co-ordinates.
#[pyfunction]
#[pyo3(signature = (f, r, variant_name = "abs", p = 2.0, q = 2.0, tol = 1e-9, trials = 10_000, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn check_bound<'py>(
    py: Python<'py>,
    f: &PyExpr,
    r: &PyRect,
    variant_name: &str,
    p: f64,
    q: f64,
    tol: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let v = variant(variant_name, p, q)?;
    let c = inequality::check_bound(v, &f.inner, &r.inner, &settings(tol, trials, seed)).map_err(py_err)?;
    to_py(py, &c)
}

#[pyfunction]
#[pyo3(signature = (f, r, tol = 1e-9, trials = 10_000, seed = 42))]
fn check_chain<'py>(
    py: Python<'py>,
    f: &PyExpr,
    r: &PyRect,
    tol: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let c = inequality::check_chain(&f.inner, &r.inner, &settings(tol, trials, seed)).map_err(py_err)?;
    to_py(py, &c)
}

/// Verdicts of the three checkers, keyed by name.
#[pyfunction]
#[pyo3(signature = (f, r, trials = 10_000, seed = 42, grid = 65))]
fn classify<'py>(
    py: Python<'py>,
    f: &PyExpr,
    r: &PyRect,
    trials: usize,
    seed: u64,
    grid: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = CheckOptions {
        trials,
        seed,
        grid,
        ..CheckOptions::default()
    };
    let verdicts = [
        (
            "quasiconvex_coords",
            check_quasiconvex_coords(&f.inner, &r.inner, &opts),
        ),
        ("convex_coords", check_convex_coords(&f.inner, &r.inner, &opts)),
        ("quasiconvex_joint", check_quasiconvex_joint(&f.inner, &r.inner, &opts)),
    ];
    let mut out = serde_json::Map::new();
    for (name, v) in verdicts {
        let v = v.map_err(py_err)?;
        out.insert(
            name.to_string(),
            serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?,
        );
    }
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (f, r, t, s, tol = 1e-9))]
fn eval_h(f: &PyExpr, r: &PyRect, t: f64, s: f64, tol: f64) -> PyResult<f64> {
    let q = mappings::eval_h(&f.inner, &r.inner, t, s, &QuadOptions::with_tol(tol)).map_err(py_err)?;
    Ok(q.value)
}

#[pyfunction]
fn eval_g(f: &PyExpr, r: &PyRect, t: f64, s: f64) -> PyResult<f64> {
    mappings::eval_g(&f.inner, &r.inner, t, s).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (which, f, r, grid = 33, tol = 1e-9, trials = 10_000, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn mapping_properties<'py>(
    py: Python<'py>,
    which: &str,
    f: &PyExpr,
    r: &PyRect,
    grid: usize,
    tol: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = match which {
        "H" | "h" => MappingKind::H,
        "G" | "g" => MappingKind::G,
        other => {
            return Err(PyValueError::new_err(format!(
                "mapping must be 'H' or 'G', got '{other}'"
            )))
        }
    };
    let reports = mappings::check_mapping_properties(kind, &f.inner, &r.inner, &settings(tol, trials, seed), grid)
        .map_err(py_err)?;
    to_py(py, &reports)
}

#[pyfunction]
#[pyo3(signature = (f, r, form = "corrected", tol = 1e-9, trials = 10_000, seed = 42))]
fn g_mean_inequality<'py>(
    py: Python<'py>,
    f: &PyExpr,
    r: &PyRect,
    form: &str,
    tol: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let form = match form {
        "printed" => GForm::Printed,
        "corrected" => GForm::Corrected,
        other => {
            return Err(PyValueError::new_err(format!(
                "form must be 'printed' or 'corrected', got '{other}'"
            )))
        }
    };
    let c = mappings::check_g_integral_inequality(&f.inner, &r.inner, form, &settings(tol, trials, seed))
        .map_err(py_err)?;
    to_py(py, &c)
}

#[pyfunction]
fn corpus<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &builtin_corpus())
}

/// Runs suites and returns the report as a dict. `options` takes the same
/// keys as a configuration file (`seed`, `tol`, `suites`, `entries`, ...).
/// With `expr` and `rect` the suites run on that expression instead of the corpus.
#[pyfunction]
#[pyo3(signature = (options = None, expr = None, rect = None))]
fn run<'py>(
    py: Python<'py>,
    options: Option<std::collections::HashMap<String, String>>,
    expr: Option<&PyExpr>,
    rect: Option<&PyRect>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = Config::default();
    let mut keys: Vec<_> = options.unwrap_or_default().into_iter().collect();
    keys.sort();
    for (k, v) in keys {
        config.set(&k, &v).map_err(py_err)?;
    }
    let entries = match (expr, rect) {
        (Some(e), Some(r)) => vec![CorpusEntry::new("expr", &e.inner.to_string(), r.inner, None, "python")],
        (None, None) => select_entries(&config.entries).map_err(py_err)?,
        _ => return Err(PyValueError::new_err("pass both expr and rect, or neither")),
    };
    let report = py.detach(|| run_suite(&config, &entries)).map_err(py_err)?;
    to_py(py, &report)
}

#[pymodule]
pub fn pyhadamard(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyRect>()?;
    m.add("HypothesisError", m.py().get_type::<HypothesisError>())?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(trapezoid_gap, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_residual, m)?)?;
    m.add_function(wrap_pyfunction!(check_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_chain, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(eval_h, m)?)?;
    m.add_function(wrap_pyfunction!(eval_g, m)?)?;
    m.add_function(wrap_pyfunction!(mapping_properties, m)?)?;
    m.add_function(wrap_pyfunction!(g_mean_inequality, m)?)?;
    m.add_function(wrap_pyfunction!(corpus, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
