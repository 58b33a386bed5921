//! Sampling and experiment-protocol checks.

mod common;

use npn_core::simulation::{outlier_count, trial_rng, ExperimentId, ExperimentSpec, MarginalTransform};
use npn_core::{
    apply_marginal_transform, compute_ranks, inject_outliers, run_experiment, run_experiment_records,
    sample_correlation_wishart, sample_gaussian, CorrelationMatrix, EstimatorConfig, EstimatorKind,
    SymMatrix, TiePolicy,
};

use common::*;

#[test]
fn wishart_draws_are_correlation_matrices() {
    let mut r = rng(30);
    let mut off_diagonal = Vec::new();
    for t in 0..10_000 {
        let d = if t < 200 { 1 + t % 12 } else { 4 };
        let s = sample_correlation_wishart(d, &mut r).unwrap();
        for i in 0..d {
            assert!((s.get(i, i) - 1.0).abs() <= 1e-12);
            for j in 0..d {
                assert_eq!(s.get(i, j), s.get(j, i));
                assert!(s.get(i, j).abs() <= 1.0);
                if d == 4 && i < j {
                    off_diagonal.push(s.get(i, j));
                }
            }
        }
    }
    assert!(mean(&off_diagonal).abs() <= 0.02, "mean {}", mean(&off_diagonal));
}

#[test]
fn gaussian_sample_moments() {
    let s = CorrelationMatrix::new(SymMatrix::from_rows(&[
        vec![1.0, 0.5, -0.3],
        vec![0.5, 1.0, 0.2],
        vec![-0.3, 0.2, 1.0],
    ])
    .unwrap())
    .unwrap();
    let n = 100_000;
    let x = sample_gaussian(&s, n, &mut rng(31)).unwrap();
    assert_eq!((x.n(), x.d()), (n, 3));
    let cols = x.columns();
    for j in 0..3 {
        assert!(mean(&cols[j]).abs() <= 0.02);
        for k in 0..3 {
            let cov = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            assert!((cov - s.get(j, k)).abs() <= 0.03, "({j},{k}) {cov}");
        }
    }
}

#[test]
fn marginal_transforms_keep_ranks() {
    let s = sample_correlation_wishart(6, &mut rng(32)).unwrap();
    let x = sample_gaussian(&s, 200, &mut rng(33)).unwrap();
    assert_eq!(apply_marginal_transform(&x, 0.0, MarginalTransform::Exp).unwrap(), x);
    let all = apply_marginal_transform(&x, 1.0, MarginalTransform::Exp).unwrap();
    assert!(all.as_slice().iter().all(|&v| v > 0.0));
    for t in MarginalTransform::NONLINEAR {
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let y = apply_marginal_transform(&x, alpha, t).unwrap();
            assert_eq!(compute_ranks(&y, TiePolicy::default()), compute_ranks(&x, TiePolicy::default()));
        }
    }
}

#[test]
fn outliers_replace_exact_counts() {
    let x = independent_normals(100, 25, &mut rng(34));
    assert_eq!(inject_outliers(&x, 0.0, &mut rng(35)).unwrap(), x);
    for beta in [0.05, 0.1, 0.2, 0.3] {
        let y = inject_outliers(&x, beta, &mut rng(36)).unwrap();
        for j in 0..25 {
            let changed: Vec<f64> = (0..100)
                .filter(|&i| y.get(i, j) != x.get(i, j))
                .map(|i| y.get(i, j))
                .collect();
            assert_eq!(changed.len(), outlier_count(beta, 100));
            assert_eq!(changed.len(), (beta * 100.0_f64).round() as usize);
            assert!(changed.iter().all(|&v| v == 5.0 || v == -5.0));
        }
    }
}

fn small_spec(id: ExperimentId) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(id);
    spec.trials = 12;
    spec.n = 60;
    spec.d = 5;
    spec
}

#[test]
fn experiments_are_deterministic() {
    for id in [ExperimentId::SampleSize, ExperimentId::Marginals, ExperimentId::Outliers, ExperimentId::Sigma] {
        let mut spec = small_spec(id);
        if id == ExperimentId::SampleSize {
            spec.sweep = vec![32.0, 64.0];
        }
        spec.seed = 99;
        assert_eq!(run_experiment_records(&spec).unwrap(), run_experiment_records(&spec).unwrap());
    }
}

#[test]
fn adding_estimators_leaves_other_errors_unchanged() {
    let mut spec = small_spec(ExperimentId::Marginals);
    spec.estimators = vec![EstimatorConfig::new(EstimatorKind::Rho)];
    let alone = run_experiment_records(&spec).unwrap();
    spec.estimators = EstimatorKind::ALL.iter().map(|&k| EstimatorConfig::new(k)).collect();
    let together: Vec<_> = run_experiment_records(&spec)
        .unwrap()
        .into_iter()
        .filter(|r| r.estimator == EstimatorKind::Rho)
        .collect();
    assert_eq!(alone, together);
}

#[test]
fn rank_estimators_ignore_transformed_marginals() {
    for t in MarginalTransform::NONLINEAR {
        let mut spec = small_spec(ExperimentId::Marginals);
        spec.sweep = vec![0.0, 1.0];
        spec.transform = t;
        let records = run_experiment_records(&spec).unwrap();
        for kind in [EstimatorKind::Gauss, EstimatorKind::Rho, EstimatorKind::Tau] {
            let at = |alpha: f64| -> Vec<u64> {
                records
                    .iter()
                    .filter(|r| r.estimator == kind && r.sweep_value == alpha)
                    .map(|r| r.squared_error.to_bits())
                    .collect()
            };
            assert_eq!(at(0.0), at(1.0), "{kind} under {t}");
        }
    }
}

#[test]
fn exponential_marginals_hurt_the_plugin() {
    let mut spec = ExperimentSpec::new(ExperimentId::Marginals);
    spec.sweep = vec![0.0, 1.0];
    spec.estimators = vec![EstimatorConfig::new(EstimatorKind::GaussianPlugin)];
    let rows = run_experiment(&spec).unwrap();
    assert!(rows[1].mse.unwrap() > rows[0].mse.unwrap());
}

#[test]
fn clean_outlier_sweep_matches_sample_size_sweep() {
    let estimators: Vec<EstimatorConfig> = EstimatorKind::ALL.iter().map(|&k| EstimatorConfig::new(k)).collect();
    let mut e1 = small_spec(ExperimentId::SampleSize);
    e1.sweep = vec![60.0];
    e1.estimators = estimators.clone();
    let mut e3 = small_spec(ExperimentId::Outliers);
    e3.sweep = vec![0.0];
    e3.estimators = estimators;
    let errors = |spec: &ExperimentSpec| -> Vec<u64> {
        run_experiment_records(spec).unwrap().iter().map(|r| r.squared_error.to_bits()).collect()
    };
    assert_eq!(errors(&e1), errors(&e3));
}

#[test]
fn sigma_sweep_uses_the_bivariate_truth() {
    let mut spec = small_spec(ExperimentId::Sigma);
    spec.d = 25;
    assert_eq!(spec.effective_d(), 2);
    spec.estimators = vec![EstimatorConfig::new(EstimatorKind::GaussianPlugin)];
    let records = run_experiment_records(&spec).unwrap();
    // recompute the plug-in on the same draw and compare with the recorded error
    for rec in records.iter().filter(|r| r.trial == 3) {
        let s = CorrelationMatrix::bivariate(rec.sweep_value).unwrap();
        let x = sample_gaussian(&s, spec.n, &mut trial_rng(spec.seed, rec.trial, 2)).unwrap();
        let est = npn_core::mi_gaussian_plugin(&x).unwrap().value;
        let truth = -0.5 * (1.0 - rec.sweep_value * rec.sweep_value).ln();
        assert!((rec.squared_error - (est - truth).powi(2)).abs() <= 1e-12);
    }
}
