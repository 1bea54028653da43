use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fnlh_core::driver::{SolveOutcome, Solver};
use fnlh_core::model::{advdiff_exact_harmonic, build_mesh, CaseConfig};
use fnlh_core::oracle::{self, OracleSettings, TimeSeries};
use fnlh_core::state::{reconstruct_instantaneous, HarmonicField, PrimitiveState};
use fnlh_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::MissingKey(_) | Error::Shape(_) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Divergence { .. } | Error::LinearDivergence { .. } | Error::State { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A case configuration.
#[pyclass(name = "Case", from_py_object)]
#[derive(Clone)]
struct PyCase {
    inner: CaseConfig,
}

#[pymethods]
impl PyCase {
    /// Parses `key = value` text; `overrides` take precedence.
    #[new]
    #[pyo3(signature = (text, overrides = None))]
    fn new(text: &str, overrides: Option<Vec<(String, String)>>) -> PyResult<Self> {
        let inner = CaseConfig::parse_with_overrides(text, &overrides.unwrap_or_default()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Self { inner: CaseConfig::from_file(std::path::Path::new(path)).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (nx, harmonics = 2))]
    fn nozzle(nx: usize, harmonics: usize) -> Self {
        Self { inner: CaseConfig::nozzle(nx, harmonics) }
    }

    #[staticmethod]
    #[pyo3(signature = (nx, ny = 1, harmonics = 1))]
    fn scalar(nx: usize, ny: usize, harmonics: usize) -> Self {
        Self { inner: CaseConfig::scalar(nx, ny, harmonics) }
    }

    #[getter]
    fn case_id(&self) -> String {
        self.inner.case_id.clone()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn omegas(&self) -> Vec<f64> {
        self.inner.harmonics.omegas()
    }

    /// Every setting with defaults filled in.
    fn settings(&self) -> Vec<(String, String)> {
        self.inner.materialized()
    }

    /// Node coordinates of the case mesh.
    fn coordinates(&self) -> PyResult<Vec<(f64, f64)>> {
        let mesh = build_mesh(&self.inner).map_err(to_py)?;
        Ok(mesh.coords().iter().map(|c| (c[0], c[1])).collect())
    }

    fn __repr__(&self) -> String {
        format!("Case(id={:?}, kind={}, nx={}, ny={})", self.inner.case_id, self.inner.kind, self.inner.nx, self.inner.ny)
    }
}

/// One retained harmonic: index, angular frequency and node-major complex
/// amplitudes.
#[pyclass(name = "Harmonic", from_py_object)]
#[derive(Clone)]
struct PyHarmonic {
    inner: HarmonicField,
}

#[pymethods]
impl PyHarmonic {
    #[new]
    fn new(index: usize, omega: f64, block: usize, values: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self { inner: HarmonicField::new(index, omega, block, values).map_err(to_py)? })
    }

    #[getter]
    fn index(&self) -> usize {
        self.inner.index
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn block(&self) -> usize {
        self.inner.block()
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.values().to_vec()
    }
}

fn fields(hs: &[HarmonicField]) -> Vec<PyHarmonic> {
    hs.iter().cloned().map(|inner| PyHarmonic { inner }).collect()
}

fn unwrap_fields(hs: &[PyHarmonic]) -> Vec<HarmonicField> {
    hs.iter().map(|h| h.inner.clone()).collect()
}

/// Outcome of a converged (or stopped) run.
#[pyclass(name = "Result")]
struct PyResult_ {
    inner: SolveOutcome,
    block: usize,
}

#[pymethods]
impl PyResult_ {
    #[getter]
    fn termination(&self) -> &'static str {
        self.inner.termination.as_str()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn message(&self) -> Option<String> {
        self.inner.message.clone()
    }

    /// `(iteration, mean residual, aggregate harmonic residual)` per outer
    /// iteration.
    fn history(&self) -> Vec<(usize, f64, Option<f64>)> {
        self.inner.history.iter().map(|r| (r.iteration, r.mean, r.r_z)).collect()
    }

    /// Node-major primitive mean state.
    fn mean(&self) -> Vec<f64> {
        self.inner.mean.values().to_vec()
    }

    fn harmonics(&self) -> Vec<PyHarmonic> {
        fields(&self.inner.harmonics)
    }

    /// Instantaneous state `mean + sum 2 Re(W_l exp(i omega_l t))`.
    fn reconstruct(&self, t: f64) -> PyResult<Vec<f64>> {
        Ok(reconstruct_instantaneous(&self.inner.mean, &self.inner.harmonics, t).map_err(to_py)?.into_values())
    }

    #[getter]
    fn block(&self) -> usize {
        self.block
    }

    #[getter]
    fn lhs_bytes(&self) -> usize {
        self.inner.lhs_bytes
    }

    #[getter]
    fn linear_mean_iterations(&self) -> f64 {
        self.inner.linear.mean_iterations()
    }
}

/// Runs the harmonic solver to its configured target.
#[pyfunction]
fn solve(py: Python<'_>, case: PyCase) -> PyResult<PyResult_> {
    let block = fnlh_core::residual::Physics::from_config(&case.inner).block();
    let inner = py.detach(move || -> Result<SolveOutcome, Error> { Ok(Solver::new(case.inner)?.run()) }).map_err(to_py)?;
    Ok(PyResult_ { inner, block })
}

/// Samples of one period of a time-accurate run.
#[pyclass(name = "TimeSeries")]
struct PyTimeSeries {
    inner: TimeSeries,
}

#[pymethods]
impl PyTimeSeries {
    #[new]
    fn new(block: usize, n_nodes: usize, period: f64, start_time: f64, samples: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: TimeSeries::new(block, n_nodes, period, start_time, samples).map_err(to_py)? })
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period
    }

    #[getter]
    fn sample_count(&self) -> usize {
        self.inner.sample_count()
    }

    fn times(&self) -> Vec<f64> {
        (0..self.inner.sample_count()).map(|q| self.inner.time(q)).collect()
    }

    fn samples(&self) -> Vec<Vec<f64>> {
        self.inner.samples.clone()
    }

    /// Returns the series as CSV text.
    fn to_csv(&self, names: Vec<String>) -> PyResult<String> {
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf, &refs).map_err(to_py)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }
}

#[pyfunction]
#[pyo3(signature = (case, max_periods = oracle::MAX_PERIODS, samples = 32))]
fn unsteady_solve(py: Python<'_>, case: PyCase, max_periods: usize, samples: usize) -> PyResult<PyTimeSeries> {
    let run = py.detach(move || oracle::unsteady_run(&case.inner, &OracleSettings::new(max_periods, samples))).map_err(to_py)?;
    Ok(PyTimeSeries { inner: run.series })
}

/// Mean and harmonics of a sampled period for the case's retained set.
#[pyfunction]
fn extract_harmonics(ts: &PyTimeSeries, case: &PyCase) -> PyResult<(Vec<f64>, Vec<PyHarmonic>)> {
    let (mean, hs) = oracle::extract_harmonics(&ts.inner, &case.inner.harmonics).map_err(to_py)?;
    Ok((mean.into_values(), fields(&hs)))
}

/// Relative L2 error per harmonic over interior nodes of the case mesh.
#[pyfunction]
fn compare_amplitudes(case: &PyCase, fnlh: Vec<PyHarmonic>, reference: Vec<PyHarmonic>) -> PyResult<Vec<(usize, f64)>> {
    let mesh = build_mesh(&case.inner).map_err(to_py)?;
    let report = oracle::compare_amplitudes(&mesh, &unwrap_fields(&fnlh), &unwrap_fields(&reference)).map_err(to_py)?;
    Ok(report.errors.iter().map(|e| (e.index, e.relative_l2)).collect())
}

#[pyfunction]
fn exact_harmonic(x: f64, y: f64, omega: f64, speed: f64, diffusivity: f64, wavenumber: f64) -> PyResult<Complex64> {
    advdiff_exact_harmonic(x, y, omega, speed, diffusivity, wavenumber).map_err(to_py)
}

#[pyfunction]
fn reconstruct(mean: Vec<f64>, harmonics: Vec<PyHarmonic>, t: f64) -> PyResult<Vec<f64>> {
    let block = harmonics.first().map_or(1, |h| h.inner.block());
    let mean = PrimitiveState::new(block, mean).map_err(to_py)?;
    Ok(reconstruct_instantaneous(&mean, &unwrap_fields(&harmonics), t).map_err(to_py)?.into_values())
}

#[pymodule]
fn fnlh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCase>()?;
    m.add_class::<PyHarmonic>()?;
    m.add_class::<PyResult_>()?;
    m.add_class::<PyTimeSeries>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(unsteady_solve, m)?)?;
    m.add_function(wrap_pyfunction!(extract_harmonics, m)?)?;
    m.add_function(wrap_pyfunction!(compare_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(exact_harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
