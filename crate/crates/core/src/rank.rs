//! Ranks, Gaussianization, and rank-correlation matrices.

use std::cmp::Ordering;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::special::probit;

/// An `n x d` matrix of finite samples; rows are samples, columns variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Shape(format!("data matrix must be nonempty, got {n}x{d}")));
        }
        if values.len() != n * d {
            return Err(Error::Shape(format!(
                "expected {} values for {n}x{d}, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / d + 1,
                column: pos % d + 1,
            });
        }
        Ok(DataMatrix { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("rows have different lengths".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, d, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    /// First `n` rows.
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.n);
        Self::new(n, self.d, self.values[..n * self.d].to_vec())
    }

    /// Applies `f` to every entry of column `j`; the result must stay finite.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = self.values.clone();
        for i in 0..self.n {
            values[i * self.d + j] = f(values[i * self.d + j]);
        }
        Self::new(self.n, self.d, values)
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(v.is_finite());
        self.values[i * self.d + j] = v;
    }
}

/// How tied values are ranked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TiePolicy {
    /// `R_ij = #{k : X_kj <= X_ij}`; tied values all get the largest rank of their group.
    #[default]
    LiteralIndicator,
    /// Tied values get the average of the ranks they span.
    MidRank,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" | "literalindicator" => Ok(TiePolicy::LiteralIndicator),
            "midrank" | "mid" => Ok(TiePolicy::MidRank),
            other => Err(Error::DomainError(format!("unknown tie policy '{other}'"))),
        }
    }
}

impl std::fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TiePolicy::LiteralIndicator => "literal",
            TiePolicy::MidRank => "midrank",
        })
    }
}

/// Column-wise ranks in `[1, n]`. Integral under [`TiePolicy::LiteralIndicator`];
/// mid-ranks may be half-integers.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    n: usize,
    d: usize,
    ranks: Vec<f64>,
}

impl RankMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.ranks[i * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

fn rank_column(column: &[f64], policy: TiePolicy) -> Vec<f64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && column[order[end]] == column[order[start]] {
            end += 1;
        }
        let rank = match policy {
            TiePolicy::LiteralIndicator => end as f64,
            TiePolicy::MidRank => (start + 1 + end) as f64 / 2.0,
        };
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

pub fn compute_ranks(x: &DataMatrix, policy: TiePolicy) -> RankMatrix {
    let (n, d) = (x.n(), x.d());
    let mut ranks = vec![0.0; n * d];
    for j in 0..d {
        for (i, r) in rank_column(&x.column(j), policy).into_iter().enumerate() {
            ranks[i * d + j] = r;
        }
    }
    RankMatrix { n, d, ranks }
}

/// Maps each entry to `probit(R_ij / (n + 1))`.
pub fn gaussianize(x: &DataMatrix, policy: TiePolicy) -> Result<DataMatrix> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InsufficientSamples { n, k: 1 });
    }
    let ranks = compute_ranks(x, policy);
    let denom = (n + 1) as f64;
    let values = ranks
        .ranks
        .iter()
        .map(|&r| probit(r / denom))
        .collect::<Result<Vec<_>>>()?;
    DataMatrix::new(n, x.d(), values)
}

/// Raw second-moment matrix `(1/n) sum_i g_i g_i^T` of the Gaussianized rows.
pub fn sigma_g(x: &DataMatrix, policy: TiePolicy) -> Result<SymMatrix> {
    let g = gaussianize(x, policy)?;
    let (n, d) = (g.n(), g.d());
    let cols = g.columns();
    Ok(SymMatrix::from_fn(d, |j, k| {
        cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    }))
}

fn pearson_matrix(cols: &[Vec<f64>]) -> Result<SymMatrix> {
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let sq_norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>())
        .collect();
    if let Some(column) = sq_norms.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateColumn { column });
    }
    Ok(SymMatrix::from_fn(cols.len(), |j, k| {
        if j == k {
            1.0
        } else {
            let dot: f64 = centered[j].iter().zip(&centered[k]).map(|(a, b)| a * b).sum();
            (dot / (sq_norms[j] * sq_norms[k]).sqrt()).clamp(-1.0, 1.0)
        }
    }))
}

/// Spearman correlation matrix: Pearson correlation of the rank columns.
pub fn spearman_matrix(x: &DataMatrix, policy: TiePolicy) -> Result<SymMatrix> {
    if x.n() < 2 {
        return Err(Error::InsufficientSamples { n: x.n(), k: 1 });
    }
    let ranks = compute_ranks(x, policy);
    let cols: Vec<Vec<f64>> = (0..x.d()).map(|j| ranks.column(j)).collect();
    pearson_matrix(&cols)
}

/// Algorithm used for pairwise Kendall statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KendallBackend {
    /// Direct enumeration of all pairs, `O(n^2)`.
    Naive,
    /// Knight's merge-sort inversion count, `O(n log n)`.
    MergeSort,
}

impl KendallBackend {
    /// Sample size from which [`kendall_matrix`] switches to merge sort.
    pub const AUTO_THRESHOLD: usize = 128;
}

/// Kendall tau-a matrix, `(1 / C(n, 2)) * sum_{i<l} sign(dx) sign(dy)`.
///
/// Tied pairs contribute zero. The backend is chosen by sample size.
pub fn kendall_matrix(x: &DataMatrix) -> Result<SymMatrix> {
    let backend = if x.n() >= KendallBackend::AUTO_THRESHOLD {
        KendallBackend::MergeSort
    } else {
        KendallBackend::Naive
    };
    kendall_matrix_with(x, backend)
}

pub fn kendall_matrix_with(x: &DataMatrix, backend: KendallBackend) -> Result<SymMatrix> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InsufficientSamples { n, k: 1 });
    }
    let cols = x.columns();
    let pairs = (n * (n - 1) / 2) as f64;
    // Merge sort works on integer ranks; ordering and ties match the raw data.
    let int_ranks: Vec<Vec<u32>> = match backend {
        KendallBackend::MergeSort => cols
            .iter()
            .map(|c| {
                rank_column(c, TiePolicy::LiteralIndicator)
                    .into_iter()
                    .map(|r| r as u32)
                    .collect()
            })
            .collect(),
        KendallBackend::Naive => Vec::new(),
    };
    Ok(SymMatrix::from_fn(x.d(), |j, k| {
        if j == k {
            return 1.0;
        }
        let score = match backend {
            KendallBackend::Naive => naive_sign_sum(&cols[j], &cols[k]),
            KendallBackend::MergeSort => merge_sort_sign_sum(&int_ranks[j], &int_ranks[k]),
        };
        (score as f64 / pairs).clamp(-1.0, 1.0)
    }))
}

fn sign(v: f64) -> i64 {
    match v.partial_cmp(&0.0) {
        Some(Ordering::Greater) => 1,
        Some(Ordering::Less) => -1,
        _ => 0,
    }
}

fn naive_sign_sum(x: &[f64], y: &[f64]) -> i64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for l in (i + 1)..n {
            s += sign(x[i] - x[l]) * sign(y[i] - y[l]);
        }
    }
    s
}

/// Concordant minus discordant pairs as `n0 - n1 - n2 + n3 - 2 * swaps`.
fn merge_sort_sign_sum(x: &[u32], y: &[u32]) -> i64 {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| (x[i], y[i]));

    let tied_pairs = |len: i64| len * (len - 1) / 2;
    let mut ties_x = 0i64;
    let mut ties_xy = 0i64;
    let mut run_x = 1i64;
    let mut run_xy = 1i64;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                ties_xy += tied_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += tied_pairs(run_x);
            ties_xy += tied_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += tied_pairs(run_x);
    ties_xy += tied_pairs(run_xy);

    let mut ys: Vec<u32> = order.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0u32; n];
    let swaps = count_inversions(&mut ys, &mut buf);

    let mut ties_y = 0i64;
    let mut run_y = 1i64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += tied_pairs(run_y);
            run_y = 1;
        }
    }
    ties_y += tied_pairs(run_y);

    tied_pairs(n as i64) - ties_x - ties_y + ties_xy - 2 * swaps
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn count_inversions(v: &mut [u32], buf: &mut [u32]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(left, bl) + count_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            swaps += (mid - i) as i64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Rank correlation whose sine map recovers the latent Gaussian correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankCorrelation {
    Spearman,
    Kendall,
}

/// Entrywise `2 sin(pi m / 6)` (Spearman) or `sin(pi m / 2)` (Kendall).
pub fn latent_from_rank_corr(m: &SymMatrix, kind: RankCorrelation) -> Result<SymMatrix> {
    if let Some(v) = m.as_slice().iter().find(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::DomainError(format!("rank correlation {v} outside [-1, 1]")));
    }
    let map = |v: f64| {
        let v = v.clamp(-1.0, 1.0);
        match kind {
            RankCorrelation::Spearman => 2.0 * (std::f64::consts::PI * v / 6.0).sin(),
            RankCorrelation::Kendall => (std::f64::consts::FRAC_PI_2 * v).sin(),
        }
    };
    Ok(SymMatrix::from_fn(m.dim(), |i, j| {
        if i == j {
            1.0
        } else {
            map(m.get(i, j)).clamp(-1.0, 1.0)
        }
    }))
}
