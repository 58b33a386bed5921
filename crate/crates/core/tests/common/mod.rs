#![allow(dead_code)]

use npn_core::{sample_gaussian, CorrelationMatrix, DataMatrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bivariate(sigma: f64, n: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    sample_gaussian(&CorrelationMatrix::bivariate(sigma).unwrap(), n, rng).unwrap()
}

pub fn independent_normals(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    let values = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    DataMatrix::new(n, d, values).unwrap()
}

pub fn random_symmetric(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Pearson correlation matrix computed directly from its definition.
pub fn pearson(x: &DataMatrix) -> Vec<Vec<f64>> {
    let cols = x.columns();
    let n = x.n() as f64;
    let stats: Vec<(f64, f64)> = cols
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n;
            let ss = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
            (m, ss)
        })
        .collect();
    (0..x.d())
        .map(|j| {
            (0..x.d())
                .map(|k| {
                    let cov: f64 = cols[j]
                        .iter()
                        .zip(&cols[k])
                        .map(|(a, b)| (a - stats[j].0) * (b - stats[k].0))
                        .sum();
                    cov / (stats[j].1 * stats[k].1).sqrt()
                })
                .collect()
        })
        .collect()
}

/// `ln det` by Gaussian elimination with partial pivoting; `None` if the
/// matrix is not positive definite.
pub fn logdet_elimination(a: &[Vec<f64>]) -> Option<f64> {
    let d = a.len();
    let mut m = a.to_vec();
    let mut logdet = 0.0;
    let mut sign = 1.0;
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        if piv != col {
            m.swap(piv, col);
            sign = -sign;
        }
        let p = m[col][col];
        if p < 0.0 {
            sign = -sign;
        }
        logdet += p.abs().ln();
        for r in col + 1..d {
            let f = m[r][col] / p;
            for c in col..d {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    (sign > 0.0).then_some(logdet)
}
