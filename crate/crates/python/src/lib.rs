//! Python bindings for `npn-core`.
//!
//! Matrices cross the boundary as lists of rows. Errors raise `npn.NpnError`
//! with the library's error code prefixed to the message.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use npn_core::simulation::{trial_rng, ExperimentId, ExperimentSpec, MarginalTransform};
use npn_core::{
    CorrelationMatrix, DataMatrix, EstimatorConfig, EstimatorKind, KendallBackend, RankCorrelation,
    SymMatrix, TiePolicy,
};

create_exception!(npn, NpnError, PyException);

fn py_err(e: npn_core::Error) -> PyErr {
    NpnError::new_err(format!("{}: {e}", e.code()))
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for npn_core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn data(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_rows(&rows).or_raise()
}

fn sym(rows: Vec<Vec<f64>>) -> PyResult<SymMatrix> {
    SymMatrix::from_rows(&rows).or_raise()
}

fn correlation(rows: Vec<Vec<f64>>) -> PyResult<CorrelationMatrix> {
    CorrelationMatrix::new(sym(rows)?).or_raise()
}

fn ties(name: &str) -> PyResult<TiePolicy> {
    name.parse().or_raise()
}

/// Result of one estimator run.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct MiEstimate {
    value: f64,
    estimator: String,
    lambda_min: Option<f64>,
    clamped: usize,
    max_diag_deviation: Option<f64>,
}

#[pymethods]
impl MiEstimate {
    fn __repr__(&self) -> String {
        format!("MiEstimate(estimator='{}', value={})", self.estimator, self.value)
    }
}

impl From<npn_core::MiEstimate> for MiEstimate {
    fn from(e: npn_core::MiEstimate) -> Self {
        MiEstimate {
            value: e.value,
            estimator: e.estimator.to_string(),
            lambda_min: e.diagnostics.lambda_min,
            clamped: e.diagnostics.clamped,
            max_diag_deviation: e.diagnostics.max_diag_deviation,
        }
    }
}

#[pyfunction]
fn cholesky_logdet(a: Vec<Vec<f64>>) -> PyResult<f64> {
    npn_core::cholesky_logdet(&sym(a)?).or_raise()
}

/// Returns `(eigenvalues, eigenvectors)` with eigenvalues nonincreasing and
/// eigenvectors as the columns of the returned row list.
#[pyfunction]
fn sym_eigen(a: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = npn_core::sym_eigen(&sym(a)?).or_raise()?;
    let d = e.dim();
    let vectors = e.eigenvectors.chunks(d).map(<[f64]>::to_vec).collect();
    Ok((e.eigenvalues, vectors))
}

#[pyfunction]
fn project_to_cone(a: Vec<Vec<f64>>, z: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(npn_core::project_to_cone(&sym(a)?, z).or_raise()?.to_rows())
}

#[pyfunction]
fn bandable_eigen_bounds(c: f64) -> PyResult<(f64, f64)> {
    npn_core::bandable_eigen_bounds(c).or_raise()
}

#[pyfunction]
fn is_bandable(a: Vec<Vec<f64>>, c: f64) -> PyResult<bool> {
    Ok(npn_core::is_bandable(&correlation(a)?, c))
}

#[pyfunction]
#[pyo3(signature = (x, ties = "literal"))]
fn compute_ranks(x: Vec<Vec<f64>>, ties: &str) -> PyResult<Vec<Vec<f64>>> {
    let r = npn_core::compute_ranks(&data(x)?, self::ties(ties)?);
    Ok((0..r.n()).map(|i| (0..r.d()).map(|j| r.get(i, j)).collect()).collect())
}

#[pyfunction]
fn probit(p: f64) -> PyResult<f64> {
    npn_core::probit(p).or_raise()
}

#[pyfunction]
fn norm_cdf(x: f64) -> f64 {
    npn_core::norm_cdf(x)
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    npn_core::digamma(x).or_raise()
}

#[pyfunction]
#[pyo3(signature = (x, ties = "literal"))]
fn gaussianize(x: Vec<Vec<f64>>, ties: &str) -> PyResult<Vec<Vec<f64>>> {
    Ok(npn_core::gaussianize(&data(x)?, self::ties(ties)?).or_raise()?.to_rows())
}

#[pyfunction]
#[pyo3(signature = (x, ties = "literal"))]
fn sigma_g(x: Vec<Vec<f64>>, ties: &str) -> PyResult<Vec<Vec<f64>>> {
    Ok(npn_core::sigma_g(&data(x)?, self::ties(ties)?).or_raise()?.to_rows())
}

#[pyfunction]
#[pyo3(signature = (x, ties = "literal"))]
fn spearman_matrix(x: Vec<Vec<f64>>, ties: &str) -> PyResult<Vec<Vec<f64>>> {
    Ok(npn_core::spearman_matrix(&data(x)?, self::ties(ties)?).or_raise()?.to_rows())
}

/// `backend` is `"auto"`, `"naive"` or `"mergesort"`.
#[pyfunction]
#[pyo3(signature = (x, backend = "auto"))]
fn kendall_matrix(x: Vec<Vec<f64>>, backend: &str) -> PyResult<Vec<Vec<f64>>> {
    let x = data(x)?;
    let m = match backend {
        "auto" => npn_core::kendall_matrix(&x),
        "naive" => npn_core::kendall_matrix_with(&x, KendallBackend::Naive),
        "mergesort" => npn_core::kendall_matrix_with(&x, KendallBackend::MergeSort),
        other => return Err(NpnError::new_err(format!("unknown Kendall backend '{other}'"))),
    };
    Ok(m.or_raise()?.to_rows())
}

/// `kind` is `"spearman"` or `"kendall"`.
#[pyfunction]
fn latent_from_rank_corr(m: Vec<Vec<f64>>, kind: &str) -> PyResult<Vec<Vec<f64>>> {
    let kind = match kind {
        "spearman" => RankCorrelation::Spearman,
        "kendall" => RankCorrelation::Kendall,
        other => return Err(NpnError::new_err(format!("unknown rank correlation '{other}'"))),
    };
    Ok(npn_core::latent_from_rank_corr(&sym(m)?, kind).or_raise()?.to_rows())
}

#[pyfunction]
fn true_mi(sigma: Vec<Vec<f64>>) -> PyResult<f64> {
    npn_core::true_mi(&correlation(sigma)?).or_raise()
}

#[pyfunction]
fn mi_from_latent(shat: Vec<Vec<f64>>, z: f64) -> PyResult<f64> {
    Ok(npn_core::mi_from_latent(&sym(shat)?, z).or_raise()?.value)
}

/// Runs one estimator. `z` and `k` default to the estimator's standard settings.
#[pyfunction]
#[pyo3(signature = (x, estimator = "rho", z = None, k = None, ties = "literal"))]
fn estimate_mi(
    x: Vec<Vec<f64>>,
    estimator: &str,
    z: Option<f64>,
    k: Option<usize>,
    ties: &str,
) -> PyResult<MiEstimate> {
    let kind: EstimatorKind = estimator.parse().or_raise()?;
    let mut cfg = EstimatorConfig::new(kind).with_tie_policy(self::ties(ties)?);
    if let Some(z) = z {
        cfg = cfg.with_z(z);
    }
    if let Some(k) = k {
        cfg = cfg.with_k(k);
    }
    Ok(npn_core::estimate_mi(&data(x)?, &cfg).or_raise()?.into())
}

#[pyfunction]
fn mi_gaussian_plugin(x: Vec<Vec<f64>>) -> PyResult<MiEstimate> {
    Ok(npn_core::mi_gaussian_plugin(&data(x)?).or_raise()?.into())
}

#[pyfunction]
#[pyo3(signature = (x, k = EstimatorConfig::DEFAULT_K))]
fn mi_knn(x: Vec<Vec<f64>>, k: usize) -> PyResult<MiEstimate> {
    Ok(npn_core::mi_knn(&data(x)?, k).or_raise()?.into())
}

#[pyfunction]
#[pyo3(signature = (x, k = EstimatorConfig::DEFAULT_K))]
fn knn_entropy(x: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    npn_core::knn_entropy(&data(x)?, k).or_raise()
}

/// Returns `(entropy, marginal_entropies, mutual_information)`.
#[pyfunction]
#[pyo3(signature = (x, z = EstimatorConfig::DEFAULT_Z, k = EstimatorConfig::DEFAULT_K, ties = "literal"))]
fn entropy_npn(x: Vec<Vec<f64>>, z: f64, k: usize, ties: &str) -> PyResult<(f64, Vec<f64>, f64)> {
    let h = npn_core::entropy_npn(&data(x)?, z, k, self::ties(ties)?).or_raise()?;
    Ok((h.value, h.marginal_entropies, h.mutual_information))
}

#[pyfunction]
#[pyo3(signature = (d, seed = 0))]
fn sample_correlation_wishart(d: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let mut rng = trial_rng(seed, 0, 1);
    Ok(npn_core::sample_correlation_wishart(d, &mut rng).or_raise()?.as_sym().to_rows())
}

#[pyfunction]
#[pyo3(signature = (sigma, n, seed = 0))]
fn sample_gaussian(sigma: Vec<Vec<f64>>, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let mut rng = trial_rng(seed, 0, 2);
    Ok(npn_core::sample_gaussian(&correlation(sigma)?, n, &mut rng).or_raise()?.to_rows())
}

/// Runs experiment 1-4 and returns one dict per (sweep value, estimator).
/// Unset arguments take the experiment's defaults.
#[pyfunction]
#[pyo3(signature = (experiment, trials = None, n = None, d = None, grid = None, transform = None, estimators = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    experiment: u8,
    trials: Option<usize>,
    n: Option<usize>,
    d: Option<usize>,
    grid: Option<Vec<f64>>,
    transform: Option<&str>,
    estimators: Option<Vec<String>>,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let id = ExperimentId::from_number(experiment).or_raise()?;
    let mut spec = ExperimentSpec::new(id);
    spec.seed = seed;
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(n) = n {
        spec.n = n;
    }
    if let Some(d) = d {
        spec.d = d;
    }
    if let Some(g) = grid {
        spec.sweep = g;
    }
    if let Some(t) = transform {
        spec.transform = t.parse::<MarginalTransform>().or_raise()?;
    }
    if let Some(names) = estimators {
        let k = spec.estimators[0].k;
        spec.estimators = names
            .iter()
            .map(|s| s.parse::<EstimatorKind>().map(|kind| EstimatorConfig::new(kind).with_k(k)))
            .collect::<npn_core::Result<_>>()
            .or_raise()?;
    }
    let rows = py.detach(|| npn_core::run_experiment(&spec)).or_raise()?;
    rows.iter()
        .map(|s| {
            let dict = PyDict::new(py);
            dict.set_item("experiment", id.number())?;
            dict.set_item("sweep_param", id.sweep_param())?;
            dict.set_item("sweep_value", s.sweep_value)?;
            dict.set_item("estimator", s.estimator.name())?;
            dict.set_item("mse", s.mse)?;
            dict.set_item("stderr", s.stderr)?;
            dict.set_item("finite_fraction", s.finite_fraction)?;
            dict.set_item("trials", s.trials)?;
            Ok(dict)
        })
        .collect()
}

#[pymodule]
fn npn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NpnError", m.py().get_type::<NpnError>())?;
    m.add_class::<MiEstimate>()?;
    m.add_function(wrap_pyfunction!(cholesky_logdet, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_cone, m)?)?;
    m.add_function(wrap_pyfunction!(bandable_eigen_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(is_bandable, m)?)?;
    m.add_function(wrap_pyfunction!(compute_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(probit, m)?)?;
    m.add_function(wrap_pyfunction!(norm_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(gaussianize, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_g, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(latent_from_rank_corr, m)?)?;
    m.add_function(wrap_pyfunction!(true_mi, m)?)?;
    m.add_function(wrap_pyfunction!(mi_from_latent, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mi, m)?)?;
    m.add_function(wrap_pyfunction!(mi_gaussian_plugin, m)?)?;
    m.add_function(wrap_pyfunction!(mi_knn, m)?)?;
    m.add_function(wrap_pyfunction!(knn_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_npn, m)?)?;
    m.add_function(wrap_pyfunction!(sample_correlation_wishart, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
