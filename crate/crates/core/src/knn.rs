//! Kozachenko-Leonenko k-nearest-neighbor entropy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rank::DataMatrix;
use crate::special::digamma;

/// `ln` of the volume of the Euclidean unit ball in `d` dimensions.
pub fn log_unit_ball_volume(d: usize) -> f64 {
    let x = d as f64 / 2.0 + 1.0;
    // ln Gamma(x) by recurrence from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)
    let (mut base, mut log_gamma) = if d % 2 == 0 {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while base < x {
        log_gamma += f64::ln(base);
        base += 1.0;
    }
    d as f64 / 2.0 * std::f64::consts::PI.ln() - log_gamma
}

/// Distance from each sample to its `k`-th nearest other sample, in input order.
pub fn kth_neighbor_distances(p: &DataMatrix, k: usize) -> Result<Vec<f64>> {
    let n = p.n();
    if k == 0 || n <= k {
        return Err(Error::InsufficientSamples { n, k });
    }
    if p.d() == 1 {
        return Ok(kth_distances_1d(&p.column(0), k));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p.get(a, 0).total_cmp(&p.get(b, 0)));
    let sorted: Vec<&[f64]> = order.iter().map(|&i| p.row(i)).collect();
    let by_position: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|pos| kth_distance_sweep(&sorted, pos, k))
        .collect();
    let mut out = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = by_position[pos];
    }
    Ok(out)
}

fn kth_distances_1d(column: &[f64], k: usize) -> Vec<f64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let v: Vec<f64> = order.iter().map(|&i| column[i]).collect();
    let mut out = vec![0.0; n];
    for pos in 0..n {
        let (mut left, mut right) = (pos, pos + 1);
        let mut dist = 0.0;
        for _ in 0..k {
            let dl = if left > 0 { v[pos] - v[left - 1] } else { f64::INFINITY };
            let dr = if right < n { v[right] - v[pos] } else { f64::INFINITY };
            if dl <= dr {
                dist = dl;
                left -= 1;
            } else {
                dist = dr;
                right += 1;
            }
        }
        out[order[pos]] = dist;
    }
    out
}

/// k-th neighbor distance of `rows[pos]`, scanning outward along the first
/// coordinate (rows are sorted by it) and stopping once that gap alone
/// exceeds the current k-th best.
fn kth_distance_sweep(rows: &[&[f64]], pos: usize, k: usize) -> f64 {
    let n = rows.len();
    let query = rows[pos];
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    let (mut left, mut right) = (pos, pos + 1);
    loop {
        let gap_l = if left > 0 { query[0] - rows[left - 1][0] } else { f64::INFINITY };
        let gap_r = if right < n { rows[right][0] - query[0] } else { f64::INFINITY };
        let (gap, idx) = if gap_l <= gap_r {
            if left == 0 {
                break;
            }
            left -= 1;
            (gap_l, left)
        } else {
            right += 1;
            (gap_r, right - 1)
        };
        if best.len() == k && gap * gap > best[k - 1] {
            break;
        }
        let d2: f64 = query
            .iter()
            .zip(rows[idx])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if best.len() < k || d2 < best[k - 1] {
            let at = best.partition_point(|&b| b <= d2);
            best.insert(at, d2);
            best.truncate(k);
        }
    }
    best[k - 1].sqrt()
}

/// Kozachenko-Leonenko entropy estimate in nats,
/// `psi(n) - psi(k) + ln V_d + (d / n) sum_i ln eps_i`.
///
/// Returns `f64::INFINITY` as the degenerate flag when some sample has `k`
/// exact duplicates (a zero k-th neighbor distance).
pub fn knn_entropy(p: &DataMatrix, k: usize) -> Result<f64> {
    let eps = kth_neighbor_distances(p, k)?;
    if eps.iter().any(|&e| e == 0.0) {
        return Ok(f64::INFINITY);
    }
    let n = p.n() as f64;
    let d = p.d() as f64;
    let log_sum: f64 = eps.iter().map(|e| e.ln()).sum();
    Ok(digamma(n)? - digamma(k as f64)? + log_unit_ball_volume(p.d()) + d / n * log_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_kth(p: &DataMatrix, k: usize) -> Vec<f64> {
        (0..p.n())
            .map(|i| {
                let mut d: Vec<f64> = (0..p.n())
                    .filter(|&j| j != i)
                    .map(|j| {
                        p.row(i)
                            .iter()
                            .zip(p.row(j))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect();
                d.sort_by(f64::total_cmp);
                d[k - 1]
            })
            .collect()
    }

    #[test]
    fn unit_ball_volumes() {
        assert_abs_diff_eq!(log_unit_ball_volume(1), 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(log_unit_ball_volume(2), std::f64::consts::PI.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            log_unit_ball_volume(3),
            (4.0 / 3.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn neighbor_search_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [1, 2, 5] {
            let rows: Vec<Vec<f64>> = (0..150)
                .map(|_| (0..d).map(|_| rng.random_range(0..20) as f64 / 7.0).collect())
                .collect();
            let p = DataMatrix::from_rows(&rows).unwrap();
            for k in [1, 2, 5] {
                assert_eq!(kth_neighbor_distances(&p, k).unwrap(), brute_kth(&p, k));
            }
        }
    }

    #[test]
    fn duplicates_flag_infinity() {
        // one value with k exact duplicates
        let p = DataMatrix::from_columns(&[vec![0.0, 1.0, 1.0, 1.0, 2.5, 3.7]]).unwrap();
        assert_eq!(knn_entropy(&p, 2).unwrap(), f64::INFINITY);
        assert!(knn_entropy(&p, 3).unwrap().is_finite());
    }

    #[test]
    fn needs_more_samples_than_k() {
        let p = DataMatrix::from_columns(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(knn_entropy(&p, 2), Err(Error::InsufficientSamples { n: 2, k: 2 }));
    }
}
