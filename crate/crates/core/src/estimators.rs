//! Mutual information and entropy estimators.
//!
//! Three rank-based nonparanormal estimators plug a latent-correlation
//! estimate into `I = -0.5 log|Sigma|` after projecting it onto
//! `S(z) = {lambda_min >= z}`:
//!
//! * [`EstimatorKind::Gauss`]: second moments of Gaussianized ranks,
//! * [`EstimatorKind::Rho`]: `2 sin(pi rho / 6)` of Spearman's rho,
//! * [`EstimatorKind::Tau`]: `sin(pi tau / 2)` of Kendall's tau.
//!
//! Baselines are the bias-corrected Gaussian plug-in and the
//! Kozachenko-Leonenko decomposition `sum_j H(X_j) - H(X)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::knn::knn_entropy;
use crate::matrix::{cholesky_logdet, project_to_cone_detailed, sym_eigen, CorrelationMatrix, SymMatrix};
use crate::rank::{
    kendall_matrix, latent_from_rank_corr, sigma_g, spearman_matrix, DataMatrix, RankCorrelation,
    TiePolicy,
};
use crate::special::digamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    /// Bias-corrected Gaussian plug-in on the empirical correlation matrix.
    GaussianPlugin,
    /// Gaussianized ranks.
    Gauss,
    /// Spearman's rho.
    Rho,
    /// Kendall's tau.
    Tau,
    /// Kozachenko-Leonenko entropies.
    Knn,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::GaussianPlugin,
        EstimatorKind::Gauss,
        EstimatorKind::Rho,
        EstimatorKind::Tau,
        EstimatorKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::GaussianPlugin => "gaussian",
            EstimatorKind::Gauss => "gauss",
            EstimatorKind::Rho => "rho",
            EstimatorKind::Tau => "tau",
            EstimatorKind::Knn => "knn",
        }
    }

    /// True for the estimators that only see ranks.
    pub fn is_rank_based(self) -> bool {
        matches!(self, EstimatorKind::Gauss | EstimatorKind::Rho | EstimatorKind::Tau)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::DomainError(format!("unknown estimator '{s}'")))
    }
}

/// Estimator selection with its tuning constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Eigenvalue floor for the projection. Zero disables it (Gauss only).
    pub z: f64,
    /// Neighbor count for kNN entropies.
    pub k: usize,
    pub tie_policy: TiePolicy,
}

impl EstimatorConfig {
    pub const DEFAULT_Z: f64 = 1e-3;
    pub const DEFAULT_K: usize = 2;

    /// Defaults: `z = 1e-3` for Rho and Tau, no projection for Gauss, `k = 2`.
    pub fn new(kind: EstimatorKind) -> Self {
        let z = match kind {
            EstimatorKind::Rho | EstimatorKind::Tau => Self::DEFAULT_Z,
            _ => 0.0,
        };
        EstimatorConfig {
            kind,
            z,
            k: Self::DEFAULT_K,
            tie_policy: TiePolicy::default(),
        }
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_tie_policy(mut self, policy: TiePolicy) -> Self {
        self.tie_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z >= 0.0) || !self.z.is_finite() {
            return Err(Error::DomainError(format!("z = {} must be nonnegative", self.z)));
        }
        if matches!(self.kind, EstimatorKind::Rho | EstimatorKind::Tau) && self.z == 0.0 {
            return Err(Error::DomainError(format!(
                "estimator {} needs a positive projection floor z",
                self.kind
            )));
        }
        if self.k == 0 {
            return Err(Error::DomainError("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Side information about how an estimate was obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// Smallest eigenvalue of the latent estimate before projection.
    pub lambda_min: Option<f64>,
    /// Eigenvalues raised to the floor `z`.
    pub clamped: usize,
    /// `max_j |Sigma_jj - 1|` of the latent estimate (nonzero only for Gauss).
    pub max_diag_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Estimate in nats; `f64::INFINITY` when the estimator degenerates.
    pub value: f64,
    pub estimator: EstimatorKind,
    pub diagnostics: Diagnostics,
}

impl MiEstimate {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `-0.5 log|Sigma_z|` together with projection diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedMi {
    pub value: f64,
    pub lambda_min: f64,
    pub clamped: usize,
}

/// Mutual information of a nonparanormal with latent correlation `sigma`.
pub fn true_mi(sigma: &CorrelationMatrix) -> Result<f64> {
    Ok(-0.5 * cholesky_logdet(sigma.as_sym())?)
}

/// Projects a latent estimate onto `S(z)` and returns `-0.5 log|Shat_z|`.
pub fn mi_from_latent(shat: &SymMatrix, z: f64) -> Result<RegularizedMi> {
    let proj = project_to_cone_detailed(shat, z)?;
    let logdet = match cholesky_logdet(&proj.matrix) {
        Ok(v) => v,
        // Rounding can push a floor at tiny z below zero; the spectrum is exact.
        Err(Error::NotPositiveDefinite) => proj.eigenvalues.iter().map(|l| l.ln()).sum(),
        Err(e) => return Err(e),
    };
    Ok(RegularizedMi {
        value: -0.5 * logdet,
        lambda_min: proj.lambda_min,
        clamped: proj.clamped,
    })
}

/// Runs one estimator on `x`.
pub fn estimate_mi(x: &DataMatrix, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    cfg.validate()?;
    if x.n() < 2 {
        return Err(Error::InsufficientSamples { n: x.n(), k: 1 });
    }
    let rank_based = |latent: SymMatrix, diag_dev: Option<f64>| -> Result<MiEstimate> {
        let r = mi_from_latent(&latent, cfg.z)?;
        Ok(MiEstimate {
            value: r.value,
            estimator: cfg.kind,
            diagnostics: Diagnostics {
                lambda_min: Some(r.lambda_min),
                clamped: r.clamped,
                max_diag_deviation: diag_dev,
            },
        })
    };
    match cfg.kind {
        EstimatorKind::GaussianPlugin => mi_gaussian_plugin(x),
        EstimatorKind::Knn => mi_knn(x, cfg.k),
        EstimatorKind::Gauss => {
            let latent = sigma_g(x, cfg.tie_policy)?;
            let diag_dev = latent
                .diagonal()
                .iter()
                .map(|d| (d - 1.0).abs())
                .fold(0.0, f64::max);
            if cfg.z > 0.0 {
                return rank_based(latent, Some(diag_dev));
            }
            let lambda_min = sym_eigen(&latent)?.min_eigenvalue();
            let value = match cholesky_logdet(&latent) {
                Ok(logdet) => -0.5 * logdet,
                Err(Error::NotPositiveDefinite) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(MiEstimate {
                value,
                estimator: cfg.kind,
                diagnostics: Diagnostics {
                    lambda_min: Some(lambda_min),
                    clamped: 0,
                    max_diag_deviation: Some(diag_dev),
                },
            })
        }
        EstimatorKind::Rho => {
            let rho = spearman_matrix(x, cfg.tie_policy)?;
            rank_based(latent_from_rank_corr(&rho, RankCorrelation::Spearman)?, None)
        }
        EstimatorKind::Tau => {
            let tau = kendall_matrix(x)?;
            rank_based(latent_from_rank_corr(&tau, RankCorrelation::Kendall)?, None)
        }
    }
}

/// `E[log|R|] - log|P|` for the empirical correlation `R` of `n` Gaussian
/// samples in `d` dimensions:
/// `sum_{j=1}^{d} psi((n - j) / 2) - d * psi((n - 1) / 2)`.
///
/// Exact for every latent correlation `P`: `log|S| - log|Sigma|` of the
/// centered scatter `S` and each `log(S_jj / Sigma_jj)` are pivotal.
pub fn plugin_log_det_bias(n: usize, d: usize) -> Result<f64> {
    if n <= d {
        return Err(Error::SingularScatter { n, d });
    }
    let mut b = -(d as f64) * digamma((n as f64 - 1.0) / 2.0)?;
    for j in 1..=d {
        b += digamma((n - j) as f64 / 2.0)?;
    }
    Ok(b)
}

fn empirical_correlation(x: &DataMatrix) -> Result<SymMatrix> {
    let (n, d) = (x.n(), x.d());
    let centered: Vec<Vec<f64>> = x
        .columns()
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            c.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::SingularScatter { n, d });
    }
    Ok(SymMatrix::from_fn(d, |j, k| {
        if j == k {
            1.0
        } else {
            let dot: f64 = centered[j].iter().zip(&centered[k]).map(|(a, b)| a * b).sum();
            (dot / (norms[j] * norms[k])).clamp(-1.0, 1.0)
        }
    }))
}

/// Gaussian plug-in `-0.5 (log|R| - b(n, d))` on the empirical correlation `R`,
/// with `b` from [`plugin_log_det_bias`].
pub fn mi_gaussian_plugin(x: &DataMatrix) -> Result<MiEstimate> {
    let (n, d) = (x.n(), x.d());
    if n <= d {
        return Err(Error::SingularScatter { n, d });
    }
    let r = empirical_correlation(x)?;
    let logdet = cholesky_logdet(&r).map_err(|_| Error::SingularScatter { n, d })?;
    let bias = plugin_log_det_bias(n, d)?;
    Ok(MiEstimate {
        value: -0.5 * (logdet - bias),
        estimator: EstimatorKind::GaussianPlugin,
        diagnostics: Diagnostics::default(),
    })
}

/// `sum_j H(X_j) - H(X)` with Kozachenko-Leonenko entropies; infinite when any
/// of the entropies degenerates.
pub fn mi_knn(x: &DataMatrix, k: usize) -> Result<MiEstimate> {
    let infinite = MiEstimate {
        value: f64::INFINITY,
        estimator: EstimatorKind::Knn,
        diagnostics: Diagnostics::default(),
    };
    let mut marginal_sum = 0.0;
    for j in 0..x.d() {
        let h = knn_entropy(&DataMatrix::from_columns(&[x.column(j)])?, k)?;
        if h.is_infinite() {
            return Ok(infinite);
        }
        marginal_sum += h;
    }
    let joint = knn_entropy(x, k)?;
    if joint.is_infinite() {
        return Ok(infinite);
    }
    Ok(MiEstimate {
        value: marginal_sum - joint,
        estimator: EstimatorKind::Knn,
        diagnostics: Diagnostics::default(),
    })
}

/// Univariate kNN entropies and the Spearman-based mutual information.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    /// `sum_j H_j - I_rho`; `f64::INFINITY` if a marginal entropy degenerated.
    pub value: f64,
    pub marginal_entropies: Vec<f64>,
    pub mutual_information: f64,
}

/// Nonparanormal joint entropy `sum_j H_j - I_{rho,z}`.
pub fn entropy_npn(x: &DataMatrix, z: f64, k: usize, policy: TiePolicy) -> Result<EntropyEstimate> {
    let mut marginal_entropies = Vec::with_capacity(x.d());
    for j in 0..x.d() {
        marginal_entropies.push(knn_entropy(&DataMatrix::from_columns(&[x.column(j)])?, k)?);
    }
    let cfg = EstimatorConfig::new(EstimatorKind::Rho)
        .with_z(z)
        .with_tie_policy(policy);
    let mi = estimate_mi(x, &cfg)?.value;
    let sum: f64 = marginal_entropies.iter().sum();
    Ok(EntropyEstimate {
        value: if sum.is_infinite() { f64::INFINITY } else { sum - mi },
        marginal_entropies,
        mutual_information: mi,
    })
}
