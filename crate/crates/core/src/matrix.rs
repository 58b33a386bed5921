//! Dense symmetric-matrix numerics.
//!
//! Row-major storage, no external linear-algebra backend. Covers what the
//! estimators need: Cholesky log-determinants, a cyclic Jacobi
//! eigensolver, Frobenius projection onto `{A : lambda_min(A) >= z}`, and the
//! Gershgorin eigenvalue bounds for bandable correlation matrices.

use crate::error::{Error, Result};

/// A dense symmetric matrix.
///
/// Construction symmetrizes the input as `(A + A^T) / 2`, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, symmetrizing them.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut m = SymMatrix { dim, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("matrix rows must form a square".into()));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim.max(1)])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len().max(1);
        let mut data = vec![0.0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        SymMatrix { dim, data }
    }

    /// Builds a symmetric matrix from a generator evaluated on the upper triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let dim = dim.max(1);
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data }
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Applies `f` to every entry. The result stays symmetric.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius distance `||self - other||_F`.
    pub fn frobenius_distance(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Lower-triangular Cholesky factor `L` with `A = L L^T`, row-major.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(l)
    }
}

/// A symmetric matrix with unit diagonal and off-diagonal entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    base: SymMatrix,
}

impl CorrelationMatrix {
    const DIAG_TOL: f64 = 1e-12;

    pub fn new(base: SymMatrix) -> Result<Self> {
        let n = base.dim();
        for i in 0..n {
            if (base.get(i, i) - 1.0).abs() > Self::DIAG_TOL {
                return Err(Error::DomainError(format!(
                    "diagonal entry {i} is {}, expected 1",
                    base.get(i, i)
                )));
            }
            for j in (i + 1)..n {
                let v = base.get(i, j);
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::DomainError(format!(
                        "off-diagonal entry ({i}, {j}) = {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(CorrelationMatrix { base })
    }

    /// Rescales a covariance matrix to unit diagonal.
    pub fn from_covariance(cov: &SymMatrix) -> Result<Self> {
        let scale: Vec<f64> = cov.diagonal().iter().map(|d| d.sqrt()).collect();
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::DomainError(
                "covariance has a non-positive diagonal entry".into(),
            ));
        }
        let m = SymMatrix::from_fn(cov.dim(), |i, j| {
            if i == j {
                1.0
            } else {
                (cov.get(i, j) / (scale[i] * scale[j])).clamp(-1.0, 1.0)
            }
        });
        Self::new(m)
    }

    /// The 2x2 matrix `[[1, sigma], [sigma, 1]]`.
    pub fn bivariate(sigma: f64) -> Result<Self> {
        Self::new(SymMatrix::from_rows(&[vec![1.0, sigma], vec![sigma, 1.0]])?)
    }

    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix {
            base: SymMatrix::identity(dim),
        }
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.base.get(i, j)
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues in nonincreasing order.
///
/// `eigenvectors` is row-major; column `j` is the eigenvector of `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty decomposition")
    }

    /// `Q diag(values) Q^T`.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim();
        let q = &self.eigenvectors;
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| q[i * n + k] * values[k] * q[j * n + k]).sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

/// `log|A|` as twice the sum of the log-diagonal of the Cholesky factor.
pub fn cholesky_logdet(a: &SymMatrix) -> Result<f64> {
    let n = a.dim();
    let l = a.cholesky()?;
    Ok(2.0 * (0..n).map(|j| l[j * n + j].ln()).sum::<f64>())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Gives up with [`Error::NoConvergence`] after `100 * dim` sweeps.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::DomainError("matrix has non-finite entries".into()));
    }
    let max_sweeps = 100 * n;
    let mut converged = false;

    for sweep in 0..max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Entries below rounding level of both diagonals are dropped.
                if sweep > 3 && 1e18 * apq.abs() < app.abs().min(aqq.abs()) {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps input order among equal eigenvalues.
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let eigenvalues = order.iter().map(|&i| m[i * n + i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Outcome of projecting onto `S(z)`, with the pre-projection spectrum summary.
#[derive(Debug, Clone)]
pub struct Projection {
    pub matrix: SymMatrix,
    /// Smallest eigenvalue of the input.
    pub lambda_min: f64,
    /// Number of eigenvalues raised to `z`.
    pub clamped: usize,
    /// Eigenvalues of the projected matrix, nonincreasing.
    pub eigenvalues: Vec<f64>,
}

/// Frobenius projection onto `S(z) = {A symmetric : lambda_min(A) >= z}`.
pub fn project_to_cone(a: &SymMatrix, z: f64) -> Result<SymMatrix> {
    Ok(project_to_cone_detailed(a, z)?.matrix)
}

/// [`project_to_cone`] that also reports how many eigenvalues were clamped.
pub fn project_to_cone_detailed(a: &SymMatrix, z: f64) -> Result<Projection> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::DomainError(format!("projection floor z = {z} must be positive")));
    }
    let eig = sym_eigen(a)?;
    let lambda_min = eig.min_eigenvalue();
    let clamped = eig.eigenvalues.iter().filter(|&&l| l < z).count();
    if clamped == 0 {
        return Ok(Projection {
            matrix: a.clone(),
            lambda_min,
            clamped,
            eigenvalues: eig.eigenvalues,
        });
    }
    let raised: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(z)).collect();
    Ok(Projection {
        matrix: eig.reconstruct_with(&raised),
        lambda_min,
        clamped,
        eigenvalues: raised,
    })
}

/// Gershgorin bounds `((1 - 3c) / (1 - c), (1 + c) / (1 - c))` on the spectrum of
/// any `c`-bandable correlation matrix, independent of its dimension.
pub fn bandable_eigen_bounds(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::DomainError(format!("bandable decay c = {c} must lie in (0, 1)")));
    }
    // Gershgorin radius of the geometric row sums
    let radius = 2.0 * c / (1.0 - c);
    Ok((1.0 - radius, 1.0 + radius))
}

/// True iff `|A_ij| <= c^|i-j| + 1e-12` for all entries.
pub fn is_bandable(a: &CorrelationMatrix, c: f64) -> bool {
    let n = a.dim();
    (0..n).all(|i| {
        (0..n).all(|j| a.get(i, j).abs() <= c.powi(i.abs_diff(j) as i32) + 1e-12)
    })
}
