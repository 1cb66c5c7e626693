//! Python bindings: problem specs, lattices, the spectral operators, the
//! monotone solver, certificates and the verifier.

use fracheat::cli_sweep::{run_sweep, SolveConfig, SweepConfig};
use fracheat::kernel_ops::{apply_hs_spectral, apply_js};
use fracheat::lattice::{make_lattice, Field};
use fracheat::spectral_constants::{self as constants, classify_regime, exponents, ProblemSpec};
use fracheat::supersolution_lab::{find_certificate, SupersolutionCertificate};
use fracheat::verifier::{run_suite, CheckConfig, CATALOG, SUITE};
use fracheat::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Config(_) | Error::UnknownCheck(_) | Error::Domain(_) | Error::Json(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Serialize through JSON so Python receives plain dicts and lists.
fn to_object<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Problem", frozen, skip_from_py_object)]
struct PyProblem {
    spec: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    /// `lambda` is given as a fraction of the sharp Hardy constant.
    #[new]
    fn new(dim: usize, s: f64, lambda_fraction: f64, p: f64) -> PyResult<Self> {
        Ok(Self { spec: ProblemSpec::from_fraction(dim, s, lambda_fraction, p).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim
    }

    #[getter]
    fn s(&self) -> f64 {
        self.spec.s
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.spec.lambda
    }

    #[getter]
    fn p(&self) -> f64 {
        self.spec.p
    }

    fn exponents<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &exponents(&self.spec).map_err(to_py)?)
    }

    fn regime(&self) -> PyResult<String> {
        Ok(classify_regime(self.spec.p, &exponents(&self.spec).map_err(to_py)?).to_string())
    }

    fn certificate(&self, py: Python<'_>) -> PyResult<PyCertificate> {
        let spec = self.spec;
        let cert = py.detach(move || find_certificate(&spec)).map_err(to_py)?;
        Ok(PyCertificate { cert })
    }

    fn __repr__(&self) -> String {
        format!("Problem(dim={}, s={}, lam={}, p={})", self.spec.dim, self.spec.s, self.spec.lambda, self.spec.p)
    }
}

#[pyclass(name = "Certificate", frozen, skip_from_py_object)]
struct PyCertificate {
    cert: SupersolutionCertificate,
}

#[pymethods]
impl PyCertificate {
    /// Parse and re-verify a saved certificate.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { cert: SupersolutionCertificate::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.cert.to_json().map_err(to_py)
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.cert.eps
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.cert.lambda1
    }

    #[getter]
    fn mu1(&self) -> f64 {
        self.cert.mu1
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.cert.theta
    }

    #[getter]
    fn interior_margin(&self) -> f64 {
        self.cert.interior_margin
    }

    #[getter]
    fn boundary_min_gap(&self) -> f64 {
        self.cert.boundary_min_gap
    }

    fn trace_value(&self, radius: f64, t: f64) -> f64 {
        self.cert.trace_value(radius, t)
    }

    fn data_envelope(&self, radius: f64, t: f64) -> f64 {
        self.cert.data_envelope(radius, t)
    }
}

#[pyclass(name = "Lattice", frozen, skip_from_py_object)]
struct PyLattice {
    lattice: fracheat::lattice::Lattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    fn new(dim: usize, half_width: f64, m: usize, t_neg: f64, t_end: f64, k: usize) -> PyResult<Self> {
        Ok(Self { lattice: make_lattice(dim, half_width, m, t_neg, t_end, k).map_err(to_py)? })
    }

    #[getter]
    fn hx(&self) -> f64 {
        self.lattice.hx()
    }

    #[getter]
    fn ht(&self) -> f64 {
        self.lattice.ht()
    }

    /// `(K, M, ..., M)`, matching the flat layout with time slowest.
    #[getter]
    fn shape(&self) -> Vec<usize> {
        std::iter::once(self.lattice.k).chain(std::iter::repeat_n(self.lattice.m, self.lattice.dim)).collect()
    }

    fn x_coords(&self) -> Vec<f64> {
        (0..self.lattice.m).map(|j| self.lattice.x_coord(j)).collect()
    }

    fn t_coords(&self) -> Vec<f64> {
        (0..self.lattice.k).map(|k| self.lattice.t_coord(k)).collect()
    }

    /// `H^s` by its space-time Fourier multiplier.
    fn apply_hs(&self, py: Python<'_>, values: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
        let lattice = self.lattice;
        py.detach(move || apply_hs_spectral(&Field::physical(lattice, values)?, s)?.into_real()).map_err(to_py)
    }

    /// The causal inverse `J_s`; values at `t <= 0` must vanish.
    fn apply_js(&self, py: Python<'_>, values: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
        let lattice = self.lattice;
        py.detach(move || apply_js(&Field::physical(lattice, values)?, s)?.into_real()).map_err(to_py)
    }
}

#[pyfunction]
fn lambda_max(dim: usize, s: f64) -> PyResult<f64> {
    constants::lambda_max(dim, s).map_err(to_py)
}

#[pyfunction]
fn upsilon(alpha: f64, dim: usize, s: f64) -> PyResult<f64> {
    constants::upsilon(alpha, dim, s).map_err(to_py)
}

#[pyfunction]
fn upsilon_inv(lam: f64, dim: usize, s: f64) -> PyResult<f64> {
    constants::upsilon_inv(lam, dim, s).map_err(to_py)
}

#[pyfunction]
fn mu_of(lam: f64, dim: usize, s: f64) -> PyResult<f64> {
    constants::mu_of(lam, dim, s).map_err(to_py)
}

/// Run the monotone scheme; `config` uses the same JSON keys as `fracheat solve`.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn solve<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SolveConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => SolveConfig::default(),
    };
    let report = py.detach(move || cfg.run()).map_err(to_py)?;
    to_object(py, &report)
}

/// Run verifier checks; `ids=None` runs the inequality suite.
#[pyfunction]
#[pyo3(signature = (ids = None, seed = 20240501, samples = 20))]
fn verify<'py>(py: Python<'py>, ids: Option<Vec<String>>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    let ids = ids.unwrap_or_else(|| SUITE.iter().map(|id| id.to_string()).collect());
    let cfg = CheckConfig { seed, samples, ..Default::default() };
    let reports = py.detach(move || run_suite(&ids.iter().map(String::as_str).collect::<Vec<_>>(), &cfg)).map_err(to_py)?;
    to_object(py, &reports)
}

#[pyfunction]
fn check_ids() -> Vec<&'static str> {
    CATALOG.to_vec()
}

/// Run a sweep from a JSON config and return its rows without writing files.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn sweep<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = match config {
        Some(text) => SweepConfig::from_json(text).map_err(to_py)?,
        None => SweepConfig::default(),
    };
    let rows = py.detach(move || run_sweep(&cfg)).map_err(to_py)?;
    to_object(py, &rows)
}

#[pymodule]
fn fracheat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyLattice>()?;
    m.add_function(wrap_pyfunction!(lambda_max, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon_inv, m)?)?;
    m.add_function(wrap_pyfunction!(mu_of, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(check_ids, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
