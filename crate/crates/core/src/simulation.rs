//! Synthetic data and the Monte Carlo experiment harness.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(seed, trial, purpose)`. The latent correlation, the Gaussian sample and
//! the outlier positions each have their own purpose, so one trial shares
//! its draws across all sweep values (common random numbers) and adding or
//! removing estimators never perturbs the data.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{estimate_mi, true_mi, EstimatorConfig, EstimatorKind};
use crate::matrix::{sym_eigen, CorrelationMatrix, SymMatrix};
use crate::rank::DataMatrix;
use crate::special::norm_cdf;

/// Strictly increasing marginal transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginalTransform {
    Identity,
    #[default]
    Exp,
    Cubic,
    Tanh,
    Sigmoid,
    NormCdf,
}

impl MarginalTransform {
    pub const NONLINEAR: [MarginalTransform; 5] = [
        MarginalTransform::Exp,
        MarginalTransform::Cubic,
        MarginalTransform::Tanh,
        MarginalTransform::Sigmoid,
        MarginalTransform::NormCdf,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            MarginalTransform::Identity => x,
            MarginalTransform::Exp => x.exp(),
            MarginalTransform::Cubic => x * x * x,
            MarginalTransform::Tanh => x.tanh(),
            MarginalTransform::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            MarginalTransform::NormCdf => norm_cdf(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarginalTransform::Identity => "identity",
            MarginalTransform::Exp => "exp",
            MarginalTransform::Cubic => "cubic",
            MarginalTransform::Tanh => "tanh",
            MarginalTransform::Sigmoid => "sigmoid",
            MarginalTransform::NormCdf => "normcdf",
        }
    }
}

impl fmt::Display for MarginalTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarginalTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(MarginalTransform::Identity)
            .chain(MarginalTransform::NONLINEAR)
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::DomainError(format!("unknown transform '{s}'")))
    }
}

/// The four experiment protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    /// Sweep over the sample size `n`.
    SampleSize,
    /// Sweep over the fraction `alpha` of transformed marginals.
    Marginals,
    /// Sweep over the outlier fraction `beta`.
    Outliers,
    /// Sweep over the correlation `sigma` of a bivariate Gaussian.
    Sigma,
}

impl ExperimentId {
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(ExperimentId::SampleSize),
            2 => Ok(ExperimentId::Marginals),
            3 => Ok(ExperimentId::Outliers),
            4 => Ok(ExperimentId::Sigma),
            _ => Err(Error::DomainError(format!("experiment must be 1-4, got {k}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ExperimentId::SampleSize => 1,
            ExperimentId::Marginals => 2,
            ExperimentId::Outliers => 3,
            ExperimentId::Sigma => 4,
        }
    }

    /// Name of the swept parameter.
    pub fn sweep_param(self) -> &'static str {
        match self {
            ExperimentId::SampleSize => "n",
            ExperimentId::Marginals => "alpha",
            ExperimentId::Outliers => "beta",
            ExperimentId::Sigma => "sigma",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            ExperimentId::SampleSize => vec![32.0, 64.0, 128.0, 256.0, 512.0, 1024.0],
            ExperimentId::Marginals => vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            ExperimentId::Outliers => vec![0.0, 0.05, 0.1, 0.2, 0.3],
            ExperimentId::Sigma => vec![0.0, 0.3, 0.6, 0.9, 0.99, 0.999],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub trials: usize,
    /// Sample size (ignored by the sample-size sweep).
    pub n: usize,
    /// Dimension (forced to 2 by the sigma sweep).
    pub d: usize,
    pub sweep: Vec<f64>,
    pub estimators: Vec<EstimatorConfig>,
    /// Marginal transform of the alpha sweep.
    pub transform: MarginalTransform,
    pub seed: u64,
}

impl ExperimentSpec {
    pub const DEFAULT_TRIALS: usize = 200;
    pub const DEFAULT_N: usize = 100;
    pub const DEFAULT_D: usize = 25;
    /// kNN neighbor count used under outlier contamination.
    pub const OUTLIER_K: usize = 20;

    /// Defaults: 200 trials, `n = 100`, `D = 25` (2 for the sigma sweep), all
    /// five estimators, seed 0.
    pub fn new(id: ExperimentId) -> Self {
        let knn_k = if id == ExperimentId::Outliers {
            Self::OUTLIER_K
        } else {
            EstimatorConfig::DEFAULT_K
        };
        ExperimentSpec {
            id,
            trials: Self::DEFAULT_TRIALS,
            n: Self::DEFAULT_N,
            d: if id == ExperimentId::Sigma { 2 } else { Self::DEFAULT_D },
            sweep: id.default_grid(),
            estimators: EstimatorKind::ALL
                .iter()
                .map(|&k| EstimatorConfig::new(k).with_k(knn_k))
                .collect(),
            transform: MarginalTransform::default(),
            seed: 0,
        }
    }

    /// Dimension actually used.
    pub fn effective_d(&self) -> usize {
        if self.id == ExperimentId::Sigma {
            2
        } else {
            self.d
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::DomainError(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.sweep.is_empty() {
            return bad("sweep grid must be nonempty".into());
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        if self.effective_d() == 0 {
            return bad("dimension must be positive".into());
        }
        if self.id != ExperimentId::SampleSize && self.n < 2 {
            return bad("n must be at least 2".into());
        }
        for cfg in &self.estimators {
            cfg.validate()?;
        }
        for &v in &self.sweep {
            let ok = match self.id {
                ExperimentId::SampleSize => v >= 2.0 && v.fract() == 0.0,
                ExperimentId::Marginals | ExperimentId::Outliers => (0.0..=1.0).contains(&v),
                ExperimentId::Sigma => v > -1.0 && v < 1.0,
            };
            if !ok {
                return bad(format!("invalid {} value {v}", self.id.sweep_param()));
            }
        }
        Ok(())
    }
}

/// Squared error of one estimator in one trial at one sweep value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub estimator: EstimatorKind,
    /// `f64::INFINITY` when the estimate was infinite or failed.
    pub squared_error: f64,
    pub trial: usize,
    /// Stream id of the trial's data draw.
    pub trial_seed: u64,
}

/// Mean squared error over the finite trials of one (sweep value, estimator) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseSummary {
    pub sweep_value: f64,
    pub estimator: EstimatorKind,
    /// `None` when no trial was finite.
    pub mse: Option<f64>,
    /// Standard error of `mse`; `None` when no trial was finite.
    pub stderr: Option<f64>,
    pub finite_fraction: f64,
    pub trials: usize,
}

const PURPOSE_SIGMA: u64 = 1;
const PURPOSE_DATA: u64 = 2;
const PURPOSE_OUTLIERS: u64 = 3;

fn stream_id(trial: usize, purpose: u64) -> u64 {
    ((trial as u64) << 8) | purpose
}

/// Independent generator for one (trial, purpose) pair.
pub fn trial_rng(seed: u64, trial: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(trial, purpose));
    rng
}

/// Random correlation matrix: `G G^T` for a `d x d` standard normal `G`
/// (Wishart with identity scale and `d` degrees of freedom), rescaled to unit
/// diagonal. Draws with `lambda_min < 1e-10` are discarded.
pub fn sample_correlation_wishart<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CorrelationMatrix> {
    const RETRIES: usize = 100;
    if d == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    for _ in 0..RETRIES {
        let g: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        let w = SymMatrix::from_fn(d, |i, j| (0..d).map(|k| g[i * d + k] * g[j * d + k]).sum());
        let Ok(corr) = CorrelationMatrix::from_covariance(&w) else {
            continue;
        };
        if sym_eigen(corr.as_sym())?.min_eigenvalue() >= 1e-10 {
            return Ok(corr);
        }
    }
    Err(Error::DegenerateDraw { retries: RETRIES })
}

/// `n` i.i.d. rows from `N(0, S)` as `L z` with `S = L L^T`.
///
/// Rows are generated in order, so a shorter draw from the same generator
/// state is a prefix of a longer one.
pub fn sample_gaussian<R: Rng + ?Sized>(s: &CorrelationMatrix, n: usize, rng: &mut R) -> Result<DataMatrix> {
    let d = s.dim();
    let l = s.as_sym().cholesky()?;
    let mut values = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..d {
            values.push((0..=i).map(|k| l[i * d + k] * z[k]).sum());
        }
    }
    DataMatrix::new(n, d, values)
}

/// Transforms columns `j` with `j < alpha * D` (0-indexed) by `t`.
pub fn apply_marginal_transform(x: &DataMatrix, alpha: f64, t: MarginalTransform) -> Result<DataMatrix> {
    let threshold = alpha * x.d() as f64;
    let mut out = x.clone();
    for j in (0..x.d()).filter(|&j| (j as f64) < threshold) {
        for i in 0..x.n() {
            out.set(i, j, t.apply(x.get(i, j)));
        }
    }
    // exp can overflow on extreme inputs
    DataMatrix::new(out.n(), out.d(), out.as_slice().to_vec())
}

/// Number of contaminated rows per column, `floor(beta * n)`.
pub fn outlier_count(beta: f64, n: usize) -> usize {
    ((beta * n as f64 + 1e-9).floor() as usize).min(n)
}

/// In each column independently, replaces `floor(beta * n)` rows chosen
/// without replacement by `-5` or `+5` with equal probability.
pub fn inject_outliers<R: Rng + ?Sized>(x: &DataMatrix, beta: f64, rng: &mut R) -> Result<DataMatrix> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::DomainError(format!("outlier fraction {beta} outside [0, 1]")));
    }
    let m = outlier_count(beta, x.n());
    let mut out = x.clone();
    if m == 0 {
        return Ok(out);
    }
    for j in 0..x.d() {
        for i in index::sample(rng, x.n(), m) {
            out.set(i, j, if rng.random_bool(0.5) { 5.0 } else { -5.0 });
        }
    }
    Ok(out)
}

/// Random `c`-bandable correlation matrix with `|A_ij| <= c^|i-j|`.
///
/// Off-diagonal magnitudes sit exactly on the bound when `boundary` is set and
/// are scaled by an independent uniform factor otherwise; signs are random.
/// The result need not be positive definite when `c >= 1/3`.
pub fn sample_bandable_correlation<R: Rng + ?Sized>(
    c: f64,
    d: usize,
    boundary: bool,
    rng: &mut R,
) -> Result<CorrelationMatrix> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::DomainError(format!("bandable decay c = {c} must lie in (0, 1)")));
    }
    if d == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    let m = SymMatrix::from_fn(d, |i, j| {
        if i == j {
            return 1.0;
        }
        let scale = if boundary { 1.0 } else { rng.random::<f64>() };
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        sign * scale * c.powi(i.abs_diff(j) as i32)
    });
    CorrelationMatrix::new(m)
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> Vec<TrialRecord> {
    let d = spec.effective_d();
    let base_sigma = match spec.id {
        ExperimentId::Sigma => None,
        _ => Some(sample_correlation_wishart(d, &mut trial_rng(spec.seed, trial, PURPOSE_SIGMA))),
    };
    let mut records = Vec::with_capacity(spec.sweep.len() * spec.estimators.len());
    for &value in &spec.sweep {
        let errors = trial_errors(spec, trial, value, base_sigma.as_ref());
        for (cfg, se) in spec.estimators.iter().zip(errors) {
            records.push(TrialRecord {
                sweep_value: value,
                estimator: cfg.kind,
                squared_error: se,
                trial,
                trial_seed: stream_id(trial, PURPOSE_DATA),
            });
        }
    }
    records
}

/// Squared error per estimator; infinite on any failure.
fn trial_errors(
    spec: &ExperimentSpec,
    trial: usize,
    value: f64,
    base_sigma: Option<&Result<CorrelationMatrix>>,
) -> Vec<f64> {
    let all_failed = vec![f64::INFINITY; spec.estimators.len()];
    let sigma = match base_sigma {
        Some(Ok(s)) => s.clone(),
        Some(Err(_)) => return all_failed,
        None => match CorrelationMatrix::bivariate(value) {
            Ok(s) => s,
            Err(_) => return all_failed,
        },
    };
    let Ok(truth) = true_mi(&sigma) else {
        return all_failed;
    };
    let n = match spec.id {
        ExperimentId::SampleSize => value as usize,
        _ => spec.n,
    };
    let data = sample_gaussian(&sigma, n, &mut trial_rng(spec.seed, trial, PURPOSE_DATA)).and_then(|x| {
        match spec.id {
            ExperimentId::Marginals => apply_marginal_transform(&x, value, spec.transform),
            ExperimentId::Outliers => {
                inject_outliers(&x, value, &mut trial_rng(spec.seed, trial, PURPOSE_OUTLIERS))
            }
            _ => Ok(x),
        }
    });
    let Ok(x) = data else {
        return all_failed;
    };
    spec.estimators
        .iter()
        .map(|cfg| match estimate_mi(&x, cfg) {
            Ok(est) if est.value.is_finite() => (est.value - truth).powi(2),
            _ => f64::INFINITY,
        })
        .collect()
}

/// Raw per-trial records, ordered by sweep value, then trial, then estimator.
pub fn run_experiment_records(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t))
        .collect();
    let per_sweep = spec.estimators.len();
    let mut out = Vec::with_capacity(per_trial.len() * spec.sweep.len() * per_sweep);
    for s in 0..spec.sweep.len() {
        for records in &per_trial {
            out.extend_from_slice(&records[s * per_sweep..(s + 1) * per_sweep]);
        }
    }
    Ok(out)
}

/// Runs every trial of `spec` and aggregates squared errors per
/// (sweep value, estimator). Output is independent of the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MseSummary>> {
    Ok(mse_aggregate(&run_experiment_records(spec)?))
}

/// Groups records by (sweep value, estimator) in order of first appearance.
///
/// Infinite squared errors count toward `trials` but not toward `mse`; a group
/// with no finite trial is reported with `mse = None`.
pub fn mse_aggregate(records: &[TrialRecord]) -> Vec<MseSummary> {
    let mut keys: Vec<(f64, EstimatorKind)> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut lookup: HashMap<(u64, EstimatorKind), usize> = HashMap::new();
    for r in records {
        let slot = *lookup
            .entry((r.sweep_value.to_bits(), r.estimator))
            .or_insert_with(|| {
                keys.push((r.sweep_value, r.estimator));
                groups.push(Vec::new());
                groups.len() - 1
            });
        groups[slot].push(r.squared_error);
    }
    keys.into_iter()
        .zip(groups)
        .map(|((sweep_value, estimator), errors)| {
            let finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
            let count = finite.len();
            let (mse, stderr) = if count == 0 {
                (None, None)
            } else {
                let mean = finite.iter().sum::<f64>() / count as f64;
                let se = if count > 1 {
                    let var = finite.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
                        / (count - 1) as f64;
                    (var / count as f64).sqrt()
                } else {
                    0.0
                };
                (Some(mean), Some(se))
            };
            MseSummary {
                sweep_value,
                estimator,
                mse,
                stderr,
                finite_fraction: count as f64 / errors.len() as f64,
                trials: errors.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{compute_ranks, TiePolicy};
    use approx::assert_abs_diff_eq;

    fn record(value: f64, se: f64) -> TrialRecord {
        TrialRecord {
            sweep_value: value,
            estimator: EstimatorKind::Rho,
            squared_error: se,
            trial: 0,
            trial_seed: 0,
        }
    }

    #[test]
    fn aggregate_single_and_pair() {
        let s = mse_aggregate(&[record(1.0, 0.04)]);
        assert_eq!(s[0].mse, Some(0.04));
        assert_eq!(s[0].stderr, Some(0.0));
        let s = mse_aggregate(&[record(1.0, 0.02), record(1.0, 0.04)]);
        assert_abs_diff_eq!(s[0].mse.unwrap(), 0.03, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_skips_infinite_trials() {
        let s = mse_aggregate(&[record(0.3, 0.02), record(0.3, f64::INFINITY)]);
        assert_eq!(s[0].mse, Some(0.02));
        assert_eq!(s[0].finite_fraction, 0.5);
        assert_eq!(s[0].trials, 2);
        let s = mse_aggregate(&[record(0.3, f64::INFINITY)]);
        assert_eq!(s[0].mse, None);
        assert_eq!(s[0].finite_fraction, 0.0);
    }

    #[test]
    fn aggregate_keeps_group_order() {
        let s = mse_aggregate(&[record(2.0, 1.0), record(1.0, 1.0), record(2.0, 3.0)]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].sweep_value, 2.0);
        assert_eq!(s[0].mse, Some(2.0));
    }

    #[test]
    fn wishart_draws_are_correlations() {
        let mut rng = trial_rng(4, 0, PURPOSE_SIGMA);
        for d in [1, 2, 6, 25] {
            let c = sample_correlation_wishart(d, &mut rng).unwrap();
            for i in 0..d {
                assert!((c.get(i, i) - 1.0).abs() <= 1e-12);
                for j in 0..d {
                    assert_eq!(c.get(i, j), c.get(j, i));
                    assert!(c.get(i, j).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn gaussian_sample_shape_and_prefix() {
        let s = CorrelationMatrix::bivariate(0.5).unwrap();
        let long = sample_gaussian(&s, 50, &mut trial_rng(1, 3, PURPOSE_DATA)).unwrap();
        let short = sample_gaussian(&s, 20, &mut trial_rng(1, 3, PURPOSE_DATA)).unwrap();
        assert_eq!((long.n(), long.d()), (50, 2));
        assert_eq!(short, long.head(20).unwrap());
    }

    #[test]
    fn marginal_transform_columns() {
        let s = CorrelationMatrix::identity(4);
        let x = sample_gaussian(&s, 30, &mut trial_rng(0, 0, PURPOSE_DATA)).unwrap();
        assert_eq!(apply_marginal_transform(&x, 0.0, MarginalTransform::Exp).unwrap(), x);
        let all = apply_marginal_transform(&x, 1.0, MarginalTransform::Exp).unwrap();
        assert!(all.as_slice().iter().all(|&v| v > 0.0));
        let half = apply_marginal_transform(&x, 0.5, MarginalTransform::Cubic).unwrap();
        assert_eq!(half.column(2), x.column(2));
        assert_ne!(half.column(1), x.column(1));
        for t in MarginalTransform::NONLINEAR {
            let y = apply_marginal_transform(&x, 0.75, t).unwrap();
            assert_eq!(
                compute_ranks(&y, TiePolicy::default()),
                compute_ranks(&x, TiePolicy::default())
            );
        }
    }

    #[test]
    fn outliers_replace_exact_counts() {
        let s = CorrelationMatrix::identity(3);
        let x = sample_gaussian(&s, 100, &mut trial_rng(0, 0, PURPOSE_DATA)).unwrap();
        let mut rng = trial_rng(0, 0, PURPOSE_OUTLIERS);
        assert_eq!(inject_outliers(&x, 0.0, &mut rng).unwrap(), x);
        for beta in [0.1, 0.29, 0.3] {
            let y = inject_outliers(&x, beta, &mut rng).unwrap();
            let m = outlier_count(beta, 100);
            for j in 0..3 {
                let changed: Vec<f64> = (0..100)
                    .filter(|&i| y.get(i, j) != x.get(i, j))
                    .map(|i| y.get(i, j))
                    .collect();
                assert_eq!(changed.len(), m);
                assert!(changed.iter().all(|v| v.abs() == 5.0));
            }
        }
        assert_eq!(outlier_count(0.29, 100), 29);
        assert!(inject_outliers(&x, 1.5, &mut rng).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(ExperimentId::Sigma);
        assert_eq!(spec.effective_d(), 2);
        spec.sweep = vec![1.0];
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::new(ExperimentId::SampleSize);
        spec.sweep = vec![10.5];
        assert!(spec.validate().is_err());
        spec.sweep.clear();
        assert!(spec.validate().is_err());
        assert!(ExperimentSpec::new(ExperimentId::Outliers).validate().is_ok());
    }

    #[test]
    fn transform_names_round_trip() {
        for t in MarginalTransform::NONLINEAR {
            assert_eq!(t.name().parse::<MarginalTransform>().unwrap(), t);
        }
        assert!("square".parse::<MarginalTransform>().is_err());
    }
}
