//! Mutual information and entropy estimation for nonparanormal (Gaussian
//! copula) data.
//!
//! The nonparanormal estimators work on ranks only: they estimate the latent
//! correlation matrix from Gaussianized ranks, Spearman's rho or Kendall's tau,
//! project it onto the cone of matrices with smallest eigenvalue at least `z`,
//! and return `-0.5 * log|Sigma_z|`. A bias-corrected Gaussian plug-in and a
//! Kozachenko-Leonenko kNN estimator serve as baselines, and [`simulation`]
//! runs the Monte Carlo comparisons.
//!
//! ```
//! use npn_core::{estimate_mi, DataMatrix, EstimatorConfig, EstimatorKind};
//!
//! let x = DataMatrix::from_rows(&[
//!     vec![0.1, 0.3],
//!     vec![0.4, 0.2],
//!     vec![1.3, 2.0],
//!     vec![2.2, 2.1],
//!     vec![-0.7, -1.0],
//! ])
//! .unwrap();
//! let est = estimate_mi(&x, &EstimatorConfig::new(EstimatorKind::Rho)).unwrap();
//! assert!(est.value > 0.0);
//! ```

pub mod cli;
pub mod error;
pub mod estimators;
pub mod io;
pub mod knn;
pub mod matrix;
pub mod rank;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{
    entropy_npn, estimate_mi, mi_from_latent, mi_gaussian_plugin, mi_knn, plugin_log_det_bias,
    true_mi, Diagnostics, EntropyEstimate, EstimatorConfig, EstimatorKind, MiEstimate, RegularizedMi,
};
pub use knn::knn_entropy;
pub use matrix::{
    bandable_eigen_bounds, cholesky_logdet, is_bandable, project_to_cone, sym_eigen,
    CorrelationMatrix, EigenDecomposition, SymMatrix,
};
pub use rank::{
    compute_ranks, gaussianize, kendall_matrix, kendall_matrix_with, latent_from_rank_corr,
    sigma_g, spearman_matrix, DataMatrix, KendallBackend, RankCorrelation, RankMatrix, TiePolicy,
};
pub use simulation::{
    apply_marginal_transform, inject_outliers, mse_aggregate, run_experiment, sample_bandable_correlation,
    run_experiment_records, sample_correlation_wishart, sample_gaussian, ExperimentId,
    ExperimentSpec, MarginalTransform, MseSummary, TrialRecord,
};
pub use special::{digamma, norm_cdf, probit};
