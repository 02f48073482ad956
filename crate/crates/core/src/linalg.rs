//! Dense symmetric linear algebra.
//!
//! Everything in the pipeline lives in a handful of small dense matrices
//! (dimension `n + 1` for the lifted problem, `r` for the factor space), so
//! this module keeps to plain row-major storage and a cyclic Jacobi
//! eigensolver instead of pulling in a general-purpose backend.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("not PSD within tolerance: min eigenvalue {min_eig:e} below -{threshold:e}")]
    NotPsd { min_eig: f64, threshold: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("matrix is numerically singular")]
    Singular,
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// A general dense matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `selfᵀ self` as a symmetric matrix.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.cols, |i, j| {
            (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum()
        })
    }

    /// `self selfᵀ` as a symmetric matrix.
    pub fn outer_gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.rows, |i, j| dot(self.row(i), self.row(j)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A dense symmetric matrix. Both triangles are stored and kept equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Reads a square row list, rejecting asymmetry above `tol` and averaging
    /// the two triangles otherwise.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self, LinalgError> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let diff = (rows[i][j] - rows[j][i]).abs();
                if diff > tol {
                    return Err(LinalgError::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    /// `v vᵀ`
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Trace inner product `⟨self, other⟩`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        dot(&self.data, &other.data)
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, alpha: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SymMatrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ self y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `Gᵀ self G` for a `dim × k` matrix `G`.
    pub fn congruence(&self, g: &Matrix) -> SymMatrix {
        assert_eq!(g.rows(), self.dim, "congruence dimension mismatch");
        let sg = self.as_matrix().matmul(g);
        let k = g.cols();
        SymMatrix::from_fn(k, |i, j| (0..self.dim).map(|l| g.get(l, i) * sg.get(l, j)).sum())
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        Ok(sym_eig(self)?.values.last().copied().unwrap_or(0.0))
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralFactorization {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SpectralFactorization {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `V diag(f(λ)) Vᵀ`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let scaled: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors.get(i, k) * scaled[k] * self.vectors.get(j, k))
                .sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|l| l)
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-15;

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eig(m: &SymMatrix) -> Result<SpectralFactorization, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius();

    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v.get(i, order[k]));
    Ok(SpectralFactorization { values, vectors })
}

/// `M ≈ V Vᵀ` with `V` holding `√λᵢ vᵢ` for the numerically nonzero eigenvalues.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    /// `dim × rank`
    pub columns: Matrix,
    pub rank: usize,
}

impl PsdFactor {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.columns.column(k)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.columns.outer_gram()
    }
}

pub const DEFAULT_RANK_TOL: f64 = 1e-7;

/// Factors a PSD matrix, dropping eigenvalues at or below `rank_tol·(1 + λ_max)`.
pub fn psd_factor(m: &SymMatrix, rank_tol: f64) -> Result<PsdFactor, LinalgError> {
    let eig = sym_eig(m)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = rank_tol * (1.0 + lmax);
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -threshold {
        return Err(LinalgError::NotPsd {
            min_eig: lmin,
            threshold,
        });
    }
    let rank = eig.values.iter().take_while(|&&l| l > threshold).count();
    let columns = Matrix::from_fn(m.dim, rank, |i, k| eig.vectors.get(i, k) * eig.values[k].sqrt());
    Ok(PsdFactor { columns, rank })
}

/// Scaled half-vectorization: off-diagonals carry a factor √2 so that
/// `svec(A)·svec(B) = ⟨A, B⟩`.
pub fn svec(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            let v = m.get(i, j);
            out.push(if i == j { v } else { v * std::f64::consts::SQRT_2 });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], dim: usize) -> SymMatrix {
    debug_assert_eq!(v.len(), dim * (dim + 1) / 2);
    let mut m = SymMatrix::zeros(dim);
    let mut k = 0;
    for j in 0..dim {
        for i in 0..=j {
            m.set(i, j, if i == j { v[k] } else { v[k] / std::f64::consts::SQRT_2 });
            k += 1;
        }
    }
    m
}

/// Relative pivot threshold for rank decisions in [`nullspace`].
const NULLSPACE_RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of `{x : cᵢ·x = 0 ∀i}` for the given vectors in `ℝ^d`,
/// via Householder QR with column pivoting on `[c₁ … c_p]`.
pub fn nullspace(d: usize, constraints: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = constraints.len();
    let mut a = Matrix::from_columns(d, constraints);
    let mut col_norms: Vec<f64> = (0..p).map(|j| norm(&a.column(j))).collect();
    let max_norm = col_norms.iter().copied().fold(0.0, f64::max);
    let mut reflectors: Vec<Vec<f64>> = Vec::new();

    for k in 0..p.min(d) {
        // pivot on the largest remaining column norm
        let (piv, best) = (k..p)
            .map(|j| {
                let s: f64 = (k..d).map(|i| a.get(i, j).powi(2)).sum();
                (j, s.sqrt())
            })
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= NULLSPACE_RANK_TOL * max_norm || best == 0.0 {
            break;
        }
        if piv != k {
            for i in 0..d {
                let t = a.get(i, k);
                a.set(i, k, a.get(i, piv));
                a.set(i, piv, t);
            }
            col_norms.swap(k, piv);
        }
        let x: Vec<f64> = (k..d).map(|i| a.get(i, k)).collect();
        let alpha = if x[0] >= 0.0 { -best } else { best };
        let mut v = x;
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            reflectors.push(vec![0.0; d - k]);
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vn);
        for j in k..p {
            let s: f64 = (k..d).map(|i| v[i - k] * a.get(i, j)).sum();
            for i in k..d {
                a.set(i, j, a.get(i, j) - 2.0 * s * v[i - k]);
            }
        }
        reflectors.push(v);
    }

    let rank = reflectors.len();
    (rank..d)
        .map(|j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            for (k, v) in reflectors.iter().enumerate().rev() {
                let s: f64 = (k..d).map(|i| v[i - k] * e[i]).sum();
                for i in k..d {
                    e[i] -= 2.0 * s * v[i - k];
                }
            }
            e
        })
        .collect()
}

/// Basis of `{Δ ∈ Sʳ : ⟨Cᵢ, Δ⟩ = 0 ∀i}`, orthonormal in the trace inner product.
pub fn sym_nullspace(r: usize, constraints: &[SymMatrix]) -> Vec<SymMatrix> {
    let d = r * (r + 1) / 2;
    let rows: Vec<Vec<f64>> = constraints.iter().map(svec).collect();
    nullspace(d, &rows).iter().map(|v| smat(v, r)).collect()
}

/// Lower Cholesky factor `L` with `M = L Lᵀ`.
pub fn cholesky(m: &SymMatrix) -> Result<Matrix, LinalgError> {
    let n = m.dim;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l.get(j, k).powi(2);
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l.get(i, k) * y[k]).sum();
        y[i] = (y[i] - s) / l.get(i, i);
    }
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l.get(k, i) * y[k]).sum();
        y[i] = (y[i] - s) / l.get(i, i);
    }
    y
}

/// Solves the square system `M x = b` by Gaussian elimination with partial
/// pivoting; pivots below `1e-14·max|Mᵢⱼ|` count as singular.
pub fn solve_linear(m: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = m.rows();
    if m.cols() != n || b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: if m.cols() != n { m.cols() } else { b.len() },
        });
    }
    let mut a = m.clone();
    let mut x = b.to_vec();
    let scale = a.data.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if !scale.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a.get(i, col).abs().total_cmp(&a.get(j, col).abs()))
            .expect("nonempty pivot range");
        if a.get(piv, col).abs() <= 1e-14 * scale {
            return Err(LinalgError::Singular);
        }
        if piv != col {
            for k in 0..n {
                let (u, v) = (a.get(col, k), a.get(piv, k));
                a.set(col, k, v);
                a.set(piv, k, u);
            }
            x.swap(col, piv);
        }
        let p = a.get(col, col);
        for i in (col + 1)..n {
            let f = a.get(i, col) / p;
            if f != 0.0 {
                for k in col..n {
                    a.set(i, k, a.get(i, k) - f * a.get(col, k));
                }
                x[i] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a.get(i, k) * x[k]).sum();
        x[i] = (x[i] - s) / a.get(i, i);
    }
    Ok(x)
}
