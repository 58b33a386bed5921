//! Property tests for the structural invariants.

mod common;

use npn_core::io::{parse_csv, write_csv};
use npn_core::simulation::{sample_bandable_correlation, trial_rng, MarginalTransform, TrialRecord};
use npn_core::{
    bandable_eigen_bounds, cholesky_logdet, compute_ranks, gaussianize, kendall_matrix,
    latent_from_rank_corr, mse_aggregate, project_to_cone, sample_correlation_wishart, sigma_g,
    spearman_matrix, sym_eigen, true_mi, DataMatrix, EstimatorKind, RankCorrelation, SymMatrix,
    TiePolicy,
};
use proptest::prelude::*;

fn distinct_columns(m: &DataMatrix) -> bool {
    (0..m.d()).all(|j| {
        let mut c = m.column(j);
        c.sort_by(f64::total_cmp);
        c.windows(2).all(|w| w[0] != w[1])
    })
}

fn data(max_n: usize, max_d: usize, range: f64) -> impl Strategy<Value = DataMatrix> {
    (3..=max_n, 1..=max_d).prop_flat_map(move |(n, d)| {
        prop::collection::vec(-range..range, n * d).prop_map(move |v| DataMatrix::new(n, d, v).unwrap())
    })
}

fn symmetric(max_d: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_d).prop_flat_map(|d| {
        prop::collection::vec(-2.0f64..2.0, d * d).prop_map(move |v| SymMatrix::from_row_major(d, v).unwrap())
    })
}

fn transform() -> impl Strategy<Value = MarginalTransform> {
    prop::sample::select(MarginalTransform::NONLINEAR.to_vec())
}

fn bits(m: &SymMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}

fn spearman_rank_difference(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> { v.iter().map(|a| v.iter().filter(|b| *b <= a).count() as f64).collect() };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_statistics_ignore_monotone_maps(x in data(40, 4, 4.0), t in transform()) {
        prop_assume!(distinct_columns(&x));
        let y = DataMatrix::new(x.n(), x.d(), x.as_slice().iter().map(|&v| t.apply(v)).collect()).unwrap();
        prop_assume!(distinct_columns(&y));
        let p = TiePolicy::default();
        prop_assert_eq!(compute_ranks(&x, p), compute_ranks(&y, p));
        prop_assert_eq!(gaussianize(&x, p).unwrap(), gaussianize(&y, p).unwrap());
        prop_assert_eq!(bits(&sigma_g(&x, p).unwrap()), bits(&sigma_g(&y, p).unwrap()));
        prop_assert_eq!(bits(&spearman_matrix(&x, p).unwrap()), bits(&spearman_matrix(&y, p).unwrap()));
        prop_assert_eq!(bits(&kendall_matrix(&x).unwrap()), bits(&kendall_matrix(&y).unwrap()));
    }

    #[test]
    fn negating_a_column_flips_signs(x in data(40, 4, 4.0), col in 0usize..4) {
        prop_assume!(distinct_columns(&x) && col < x.d());
        let y = x.map_column(col, |v| -v).unwrap();
        let p = TiePolicy::default();
        for (a, b) in [
            (spearman_matrix(&x, p).unwrap(), spearman_matrix(&y, p).unwrap()),
            (kendall_matrix(&x).unwrap(), kendall_matrix(&y).unwrap()),
        ] {
            for j in 0..x.d() {
                for k in 0..x.d() {
                    let expected = if j != k && (j == col || k == col) { -a.get(j, k) } else { a.get(j, k) };
                    prop_assert_eq!(b.get(j, k), expected);
                }
            }
        }
    }

    #[test]
    fn spearman_matches_rank_difference_formula(x in data(60, 2, 100.0)) {
        prop_assume!(x.d() == 2 && distinct_columns(&x));
        let s = spearman_matrix(&x, TiePolicy::default()).unwrap();
        let oracle = spearman_rank_difference(&x.column(0), &x.column(1));
        prop_assert!((s.get(0, 1) - oracle).abs() <= 1e-12);
    }

    #[test]
    fn resampling_one_row_moves_spearman_by_at_most_18_over_n(
        x in data(60, 3, 10.0),
        row in any::<prop::sample::Index>(),
        fresh in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        prop_assume!(x.d() >= 2 && distinct_columns(&x));
        let i = row.index(x.n());
        let mut rows = x.to_rows();
        rows[i] = fresh[..x.d()].to_vec();
        let y = DataMatrix::from_rows(&rows).unwrap();
        prop_assume!(distinct_columns(&y));
        let p = TiePolicy::default();
        let (a, b) = (spearman_matrix(&x, p).unwrap(), spearman_matrix(&y, p).unwrap());
        let bound = 18.0 / x.n() as f64;
        for j in 0..x.d() {
            for k in 0..x.d() {
                prop_assert!((a.get(j, k) - b.get(j, k)).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn ranks_stay_in_range(x in data(30, 3, 3.0), midrank in any::<bool>()) {
        // coarse rounding creates ties
        let x = DataMatrix::new(x.n(), x.d(), x.as_slice().iter().map(|v| v.round()).collect()).unwrap();
        let p = if midrank { TiePolicy::MidRank } else { TiePolicy::LiteralIndicator };
        let r = compute_ranks(&x, p);
        for i in 0..x.n() {
            for j in 0..x.d() {
                prop_assert!(r.get(i, j) >= 1.0 && r.get(i, j) <= x.n() as f64);
            }
        }
    }

    #[test]
    fn distinct_columns_rank_to_permutations(x in data(30, 3, 3.0)) {
        prop_assume!(distinct_columns(&x));
        let r = compute_ranks(&x, TiePolicy::default());
        for j in 0..x.d() {
            let mut c = r.column(j);
            c.sort_by(f64::total_cmp);
            let expected: Vec<f64> = (1..=x.n()).map(|v| v as f64).collect();
            prop_assert_eq!(c, expected);
        }
    }

    #[test]
    fn rank_correlation_matrices_are_valid(x in data(40, 4, 3.0)) {
        let x = DataMatrix::new(x.n(), x.d(), x.as_slice().iter().map(|v| (v * 3.0).round()).collect()).unwrap();
        let p = TiePolicy::default();
        let mats = [spearman_matrix(&x, p), kendall_matrix(&x)];
        for m in mats.into_iter().flatten() {
            for kind in [RankCorrelation::Spearman, RankCorrelation::Kendall] {
                let latent = latent_from_rank_corr(&m, kind).unwrap();
                for mm in [&m, &latent] {
                    for j in 0..x.d() {
                        prop_assert_eq!(mm.get(j, j), 1.0);
                        for k in 0..x.d() {
                            prop_assert_eq!(mm.get(j, k), mm.get(k, j));
                            prop_assert!(mm.get(j, k).abs() <= 1.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(a in symmetric(10)) {
        let e = sym_eigen(&a).unwrap();
        let d = a.dim();
        let tol = 1e-9 * a.frobenius_norm().max(1.0);
        prop_assert!(e.reconstruct().frobenius_distance(&a) <= tol);
        let q = &e.eigenvectors;
        let mut off = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| q[k * d + i] * q[k * d + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                off += (dot - target) * (dot - target);
            }
        }
        prop_assert!(off.sqrt() <= 1e-9);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn projection_is_idempotent_and_floors_the_spectrum(a in symmetric(8), z in 1e-3f64..0.5) {
        let p = project_to_cone(&a, z).unwrap();
        prop_assert!(sym_eigen(&p).unwrap().min_eigenvalue() >= z - 1e-10);
        let pp = project_to_cone(&p, z).unwrap();
        for (x, y) in p.as_slice().iter().zip(pp.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        if let Ok(before) = cholesky_logdet(&a) {
            prop_assert!(cholesky_logdet(&p).unwrap() >= before - 1e-10);
        }
    }

    #[test]
    fn cholesky_log_det_matches_eigenvalues(seed in any::<u64>(), d in 1usize..12) {
        let s = sample_correlation_wishart(d, &mut trial_rng(seed, 0, 1)).unwrap();
        let chol = cholesky_logdet(s.as_sym()).unwrap();
        let eig: f64 = sym_eigen(s.as_sym()).unwrap().eigenvalues.iter().map(|l| l.ln()).sum();
        prop_assert!((chol - eig).abs() <= 1e-8);
        prop_assert!(true_mi(&s).unwrap() >= 0.0);
    }

    #[test]
    fn bandable_spectra_respect_bounds(seed in any::<u64>(), c in 0.01f64..0.33, d in 1usize..30, boundary in any::<bool>()) {
        let (lower, upper) = bandable_eigen_bounds(c).unwrap();
        let a = sample_bandable_correlation(c, d, boundary, &mut trial_rng(seed, 0, 4)).unwrap();
        prop_assert!(npn_core::is_bandable(&a, c));
        let e = sym_eigen(a.as_sym()).unwrap();
        prop_assert!(e.min_eigenvalue() >= lower - 1e-9);
        prop_assert!(e.eigenvalues[0] <= upper + 1e-9);
    }

    #[test]
    fn csv_round_trip_is_bit_identical(
        n in 1usize..20,
        d in 1usize..5,
        raw in prop::collection::vec(any::<f64>(), 100),
    ) {
        let values: Vec<f64> = raw.iter().cycle().take(n * d).map(|v| if v.is_finite() { *v } else { 0.5 }).collect();
        let x = DataMatrix::new(n, d, values).unwrap();
        let mut buf = Vec::new();
        write_csv(&x, &mut buf).unwrap();
        let y = parse_csv(buf.as_slice()).unwrap();
        let xb: Vec<u64> = x.as_slice().iter().map(|v| v.to_bits()).collect();
        let yb: Vec<u64> = y.as_slice().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!((y.n(), y.d()), (n, d));
        prop_assert_eq!(xb, yb);
    }

    #[test]
    fn aggregate_averages_finite_errors(errors in prop::collection::vec(prop_oneof![3 => 0.0f64..10.0, 1 => Just(f64::INFINITY)], 1..40)) {
        let records: Vec<TrialRecord> = errors
            .iter()
            .enumerate()
            .map(|(t, &e)| TrialRecord { sweep_value: 1.0, estimator: EstimatorKind::Knn, squared_error: e, trial: t, trial_seed: t as u64 })
            .collect();
        let s = mse_aggregate(&records);
        prop_assert_eq!(s.len(), 1);
        let finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
        prop_assert_eq!(s[0].trials, errors.len());
        prop_assert!((s[0].finite_fraction - finite.len() as f64 / errors.len() as f64).abs() < 1e-15);
        match s[0].mse {
            None => prop_assert!(finite.is_empty()),
            Some(m) => prop_assert!((m - common::mean(&finite)).abs() <= 1e-12 * m.max(1.0)),
        }
    }
}
