//! Python bindings for `kriging_mean`.

use std::path::PathBuf;

use kriging_mean as km;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(kriging_mean, KrigingError, PyValueError);
create_exception!(kriging_mean, NoRootError, KrigingError);

fn to_py(err: km::Error) -> PyErr {
    match err {
        km::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e @ km::Error::NoRootInRange { .. } => NoRootError::new_err(e.to_string()),
        e => KrigingError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = km::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "CorrelationModel", module = "kriging_mean", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyCorrelationModel(km::CorrelationModel);

#[pymethods]
impl PyCorrelationModel {
    #[new]
    #[pyo3(signature = (family, range, nugget=0.0, damping=None))]
    fn new(family: &str, range: f64, nugget: f64, damping: Option<f64>) -> PyResult<Self> {
        km::CorrelationModel::new(parse(family)?, range, nugget, damping)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn exponential(range: f64) -> PyResult<Self> {
        km::CorrelationModel::exponential(range).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn gaussian(range: f64) -> PyResult<Self> {
        km::CorrelationModel::gaussian(range).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn spherical(range: f64) -> PyResult<Self> {
        km::CorrelationModel::spherical(range).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn damped_cosine(range: f64, damping: f64) -> PyResult<Self> {
        km::CorrelationModel::damped_cosine(range, damping)
            .map(Self)
            .map_err(to_py)
    }

    fn with_nugget(&self, nugget: f64) -> PyResult<Self> {
        self.0.with_nugget(nugget).map(Self).map_err(to_py)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family().name()
    }

    #[getter]
    fn range(&self) -> f64 {
        self.0.range()
    }

    #[getter]
    fn nugget(&self) -> f64 {
        self.0.nugget()
    }

    #[getter]
    fn damping(&self) -> Option<f64> {
        self.0.damping()
    }

    fn eval(&self, lag: f64) -> f64 {
        self.0.eval(lag)
    }

    fn __call__(&self, lags: Vec<f64>) -> Vec<f64> {
        lags.iter().map(|&h| self.0.eval(h)).collect()
    }

    fn __repr__(&self) -> String {
        format!("CorrelationModel({})", self.0)
    }
}

#[pyclass(name = "KrigingSolution", module = "kriging_mean", frozen, get_all)]
struct PySolution {
    j: usize,
    weights: Vec<f64>,
    multiplier: f64,
}

#[pymethods]
impl PySolution {
    fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn __repr__(&self) -> String {
        format!(
            "KrigingSolution(j={}, n={}, multiplier={})",
            self.j,
            self.weights.len(),
            self.multiplier
        )
    }
}

impl From<km::KrigingSolution> for PySolution {
    fn from(s: km::KrigingSolution) -> Self {
        Self {
            j: s.j,
            weights: s.weights,
            multiplier: s.multiplier,
        }
    }
}

#[pyclass(name = "KrigingSystem", module = "kriging_mean", frozen)]
struct PySystem(km::KrigingSystem);

#[pymethods]
impl PySystem {
    #[new]
    fn new(model: &PyCorrelationModel, n: usize) -> PyResult<Self> {
        km::KrigingSystem::new(model.0, n).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn model(&self) -> PyCorrelationModel {
        PyCorrelationModel(*self.0.model())
    }

    /// Λ as a list of rows.
    fn lambda_matrix(&self) -> Vec<Vec<f64>> {
        self.0
            .lambda_matrix()
            .chunks(self.0.n())
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// `FᵀΛ⁻¹F`
    fn ones_quadratic_form(&self) -> f64 {
        self.0.ones_quadratic_form()
    }

    fn classic_weights(&self) -> Vec<f64> {
        self.0.classic_ls_weights()
    }

    fn asymptotic_xi(&self) -> f64 {
        km::asymptotic_xi(&self.0)
    }

    fn rhs(&self, j: usize) -> PyResult<Vec<f64>> {
        self.0.rhs(j).map_err(to_py)
    }

    fn solve(&self, rhs: Vec<f64>, j: usize) -> PyResult<PySolution> {
        self.0.solve(&rhs, j).map(Into::into).map_err(to_py)
    }

    fn solve_at(&self, j: usize) -> PyResult<PySolution> {
        self.0.solve_at(j).map(|(_, s)| s.into()).map_err(to_py)
    }

    fn quadratic_form(&self, weights: Vec<f64>) -> PyResult<f64> {
        if weights.len() != self.0.n() {
            return Err(to_py(km::Error::DimensionMismatch {
                expected: self.0.n(),
                got: weights.len(),
            }));
        }
        Ok(self.0.quadratic_form(&weights))
    }

    fn __repr__(&self) -> String {
        format!("KrigingSystem(n={}, model={})", self.0.n(), self.0.model())
    }
}

#[pyclass(name = "ScanPoint", module = "kriging_mean", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyScanPoint {
    j: usize,
    residual: f64,
    estimate: f64,
    multiplier: f64,
    xi_hat: f64,
    min_sq_error: f64,
}

#[pymethods]
impl PyScanPoint {
    fn __repr__(&self) -> String {
        format!(
            "ScanPoint(j={}, residual={}, estimate={})",
            self.j, self.residual, self.estimate
        )
    }
}

impl From<km::ScanPoint> for PyScanPoint {
    fn from(p: km::ScanPoint) -> Self {
        Self {
            j: p.j,
            residual: p.residual,
            estimate: p.estimate,
            multiplier: p.multiplier,
            xi_hat: p.xi_hat,
            min_sq_error: p.min_sq_error,
        }
    }
}

impl From<PyScanPoint> for km::ScanPoint {
    fn from(p: PyScanPoint) -> Self {
        Self {
            j: p.j,
            residual: p.residual,
            estimate: p.estimate,
            multiplier: p.multiplier,
            xi_hat: p.xi_hat,
            min_sq_error: p.min_sq_error,
        }
    }
}

#[pyclass(name = "RootResult", module = "kriging_mean", frozen, get_all)]
struct PyRootResult {
    j_star: usize,
    point: PyScanPoint,
    bracketed: bool,
}

#[pymethods]
impl PyRootResult {
    fn __repr__(&self) -> String {
        format!(
            "RootResult(j_star={}, estimate={}, bracketed={})",
            self.j_star,
            self.point.estimate,
            if self.bracketed { "True" } else { "False" }
        )
    }
}

impl From<km::RootResult> for PyRootResult {
    fn from(r: km::RootResult) -> Self {
        Self {
            j_star: r.j_star,
            point: r.point.into(),
            bracketed: r.bracketed,
        }
    }
}

#[pyclass(name = "PipelineResult", module = "kriging_mean", frozen, get_all)]
struct PyPipelineResult {
    n: usize,
    acf: Vec<f64>,
    model: PyCorrelationModel,
    sigma2: f64,
    classic_estimate: f64,
    scan: Vec<PyScanPoint>,
    root: Py<PyRootResult>,
    root_found: bool,
}

#[pymethods]
impl PyPipelineResult {
    fn __repr__(&self) -> String {
        format!(
            "PipelineResult(n={}, j_star={}, root_found={})",
            self.n,
            self.root.get().j_star,
            if self.root_found { "True" } else { "False" }
        )
    }
}

/// Sample autocorrelation at lags `0..=max_lag`.
#[pyfunction]
fn sample_acf(values: Vec<f64>, max_lag: usize) -> PyResult<Vec<f64>> {
    km::sample_acf(&values, max_lag)
        .map(|a| a.values().to_vec())
        .map_err(to_py)
}

/// Fits a correlation family to ACF values estimated from `n_used` samples.
#[pyfunction]
#[pyo3(signature = (acf, family="exponential", n_used=None, nugget=0.0))]
fn fit_model(
    acf: Vec<f64>,
    family: &str,
    n_used: Option<usize>,
    nugget: f64,
) -> PyResult<PyCorrelationModel> {
    let n_used = n_used.unwrap_or(acf.len());
    let acf = km::EmpiricalAcf::from_values(acf, n_used).map_err(to_py)?;
    km::fit_model_with_nugget(&acf, parse(family)?, nugget)
        .map(PyCorrelationModel)
        .map_err(to_py)
}

#[pyfunction]
fn assemble_rhs(model: &PyCorrelationModel, n: usize, j: usize) -> PyResult<Vec<f64>> {
    km::assemble_rhs(&model.0, n, j).map_err(to_py)
}

#[pyfunction]
fn estimate_mean(weights: Vec<f64>, values: Vec<f64>) -> PyResult<f64> {
    km::estimate_mean(&weights, &values).map_err(to_py)
}

/// Evaluates every extrapolation index in `j_from..=j_to`.
#[pyfunction]
#[pyo3(signature = (system, window, j_from, j_to, sigma2=1.0, parallel=false))]
fn scan_residuals(
    py: Python<'_>,
    system: &PySystem,
    window: Vec<f64>,
    j_from: usize,
    j_to: usize,
    sigma2: f64,
    parallel: bool,
) -> PyResult<Vec<PyScanPoint>> {
    let scan = py.detach(|| {
        if parallel {
            km::par_scan_residuals(&system.0, &window, j_from, j_to, sigma2)
        } else {
            km::scan_residuals(&system.0, &window, j_from, j_to, sigma2)
        }
    });
    scan.map(|s| s.into_iter().map(Into::into).collect())
        .map_err(to_py)
}

/// Index with the smallest |residual|; raises `NoRootError` when no sign
/// change is found and the best residual exceeds `tolerance`.
#[pyfunction]
#[pyo3(signature = (scan, tolerance=km::pipeline::DEFAULT_TOLERANCE))]
fn find_root_j(scan: Vec<PyRef<'_, PyScanPoint>>, tolerance: f64) -> PyResult<PyRootResult> {
    let points: Vec<km::ScanPoint> = scan.iter().map(|p| (**p).into()).collect();
    km::find_root_j(&points, tolerance)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (phi, length, seed=0, mean=0.0, sigma=1.0))]
fn generate_ar1(phi: f64, length: usize, seed: u64, mean: f64, sigma: f64) -> PyResult<Vec<f64>> {
    let spec = km::Ar1Spec {
        phi,
        mean,
        sigma,
        length,
        seed,
    };
    km::generate_ar1(&spec)
        .map(|s| s.values().to_vec())
        .map_err(to_py)
}

/// Reads a `date,close` or `close` CSV. Returns the values and the ISO dates
/// (or `None` when the file has no date column).
#[pyfunction]
fn load_series(path: PathBuf) -> PyResult<(Vec<f64>, Option<Vec<String>>)> {
    let series = km::load_series_path(&path).map_err(to_py)?;
    let labels = series
        .labels()
        .map(|ls| ls.iter().map(|d| d.format("%Y-%m-%d").to_string()).collect());
    Ok((series.values().to_vec(), labels))
}

/// Monte Carlo convergence table; one dict per window size.
#[pyfunction]
#[pyo3(signature = (phi, n_grid, replicates, seed=0, mean=0.0, sigma=1.0))]
fn mc_asymptotics<'py>(
    py: Python<'py>,
    phi: f64,
    n_grid: Vec<usize>,
    replicates: usize,
    seed: u64,
    mean: f64,
    sigma: f64,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let spec = km::Ar1Spec {
        phi,
        mean,
        sigma,
        // unused by the Monte Carlo driver
        length: 2,
        seed,
    };
    let rows = py
        .detach(|| km::mc_asymptotics(&spec, &n_grid, replicates))
        .map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("j_star", r.j_star)?;
            d.set_item("mse", r.mse)?;
            d.set_item("mse_se", r.mse_se)?;
            d.set_item("mse_predicted", r.mse_predicted)?;
            d.set_item("prediction_error_var", r.prediction_error_var)?;
            d.set_item("prediction_error_var_se", r.prediction_error_var_se)?;
            d.set_item(
                "prediction_error_var_predicted",
                r.prediction_error_var_predicted,
            )?;
            d.set_item("estimate_mean", r.estimate_mean)?;
            d.set_item("estimate_sd", r.estimate_sd)?;
            Ok(d)
        })
        .collect()
}

/// Fit, scan and root search on the first `n` values of a series.
#[pyfunction]
#[pyo3(signature = (
    values, n, family="exponential", nugget=0.0, max_lag=None, j_max=None,
    tolerance=km::pipeline::DEFAULT_TOLERANCE, units="normalized", parallel=true
))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    py: Python<'_>,
    values: Vec<f64>,
    n: usize,
    family: &str,
    nugget: f64,
    max_lag: Option<usize>,
    j_max: Option<usize>,
    tolerance: f64,
    units: &str,
    parallel: bool,
) -> PyResult<PyPipelineResult> {
    let mut config = km::pipeline::PipelineConfig::new(n);
    config.family = parse(family)?;
    config.nugget = nugget;
    config.max_lag = max_lag;
    config.j_max = j_max;
    config.tolerance = tolerance;
    config.units = parse(units)?;
    config.parallel = parallel;
    let series = km::TimeSeries::new(values).map_err(to_py)?;
    let out = py
        .detach(|| km::pipeline::run_pipeline(&series, &config))
        .map_err(to_py)?;
    let sigma2 = match config.units {
        km::pipeline::Units::Normalized => 1.0,
        km::pipeline::Units::Absolute => out.stats.sigma2,
    };
    Ok(PyPipelineResult {
        n: out.n,
        acf: out.acf.values().to_vec(),
        model: PyCorrelationModel(out.model),
        sigma2,
        classic_estimate: out.classic_estimate,
        scan: out.scan.into_iter().map(Into::into).collect(),
        root: Py::new(py, PyRootResult::from(out.root))?,
        root_found: out.root_found,
    })
}

#[pymodule]
#[pyo3(name = "kriging_mean")]
pub fn kriging_mean_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("KrigingError", py.get_type::<KrigingError>())?;
    m.add("NoRootError", py.get_type::<NoRootError>())?;
    m.add_class::<PyCorrelationModel>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyScanPoint>()?;
    m.add_class::<PyRootResult>()?;
    m.add_class::<PyPipelineResult>()?;
    m.add_function(wrap_pyfunction!(sample_acf, m)?)?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean, m)?)?;
    m.add_function(wrap_pyfunction!(scan_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(find_root_j, m)?)?;
    m.add_function(wrap_pyfunction!(generate_ar1, m)?)?;
    m.add_function(wrap_pyfunction!(load_series, m)?)?;
    m.add_function(wrap_pyfunction!(mc_asymptotics, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
