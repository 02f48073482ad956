//! Quadratic programs over the doubly stochastic matrices.
//!
//! With `x = e/n + N y` the row and column sums hold identically, and each
//! box constraint `0 ≤ xᵢ ≤ 1` becomes the one-row ellipsoid
//! `(2Nᵢy + 2/n − 1)² ≤ 1`, giving an ECQP in `(n−1)²` variables with
//! `m = n²` constraints and `γ = 1 − 2/n`.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facered::r0_of;
use crate::linalg::{dot, Matrix, SymMatrix};
use crate::model::{EcqpInstance, Ellipsoid};
use crate::pipeline::{run_pipeline, PipelineOptions, PipelineRun};
use crate::rounding::RoundingCertificate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsqpError {
    #[error("assignment size n = {0} must be at least 2")]
    TooSmall(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("A is not symmetric (entry ({0}, {1}))")]
    Asymmetric(usize, usize),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// `min xᵀAx + 2bᵀx` over `n × n` doubly stochastic `x`, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AsqpInstance {
    pub n: usize,
    pub a: SymMatrix,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsqpJson {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl AsqpInstance {
    pub fn new(n: usize, a: SymMatrix, b: Vec<f64>) -> Result<Self, AsqpError> {
        if n < 2 {
            return Err(AsqpError::TooSmall(n));
        }
        if a.dim() != n * n || b.len() != n * n {
            return Err(AsqpError::Shape(format!(
                "n = {n} needs A of size {0}×{0} and b of length {0}, got {1} and {2}",
                n * n,
                a.dim(),
                b.len()
            )));
        }
        Ok(Self { n, a, b })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.a.quad_form(x) + 2.0 * dot(&self.b, x)
    }

    pub fn to_json(&self) -> AsqpJson {
        AsqpJson {
            n: self.n,
            a: self.a.to_rows(),
            b: self.b.clone(),
        }
    }

    pub fn from_json(j: &AsqpJson) -> Result<Self, AsqpError> {
        let d = j.n * j.n;
        if j.a.len() != d || j.a.iter().any(|r| r.len() != d) {
            return Err(AsqpError::Shape(format!("A must be {d}×{d}")));
        }
        for i in 0..d {
            for k in 0..i {
                let (p, q) = (j.a[i][k], j.a[k][i]);
                if (p - q).abs() > 1e-12 * (1.0 + p.abs().max(q.abs())) {
                    return Err(AsqpError::Asymmetric(i, k));
                }
            }
        }
        Self::new(j.n, SymMatrix::from_fn(d, |i, k| j.a[i][k]), j.b.clone())
    }
}

/// Seeded instance with `A` symmetric Gaussian (scaled by `1/n`) and
/// `b` Gaussian scaled by `1/2`.
pub fn random_asqp(seed: u64, n: usize) -> AsqpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = n * n;
    let mut g = vec![0.0; d * d];
    for v in g.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    let s = 1.0 / n as f64;
    let a = SymMatrix::from_fn(d, |i, j| 0.5 * s * (g[i * d + j] + g[j * d + i]));
    let b = (0..d).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    AsqpInstance::new(n, a, b).expect("sizes are consistent by construction")
}

/// `N` with columns `e_k e_lᵀ − e_k e_nᵀ − e_n e_lᵀ + e_n e_nᵀ`, `k, l < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceBasis {
    pub n: usize,
    /// `n² × (n−1)²`
    pub matrix: Matrix,
}

impl NullspaceBasis {
    /// `e/n + N y`
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let c = 1.0 / self.n as f64;
        self.matrix.mul_vec(y).into_iter().map(|v| v + c).collect()
    }

    /// The `y` with `lift(y) = x` for doubly stochastic `x`: the leading
    /// `(n−1) × (n−1)` block minus `1/n`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let c = 1.0 / n as f64;
        (0..n - 1)
            .flat_map(|k| (0..n - 1).map(move |l| x[k * n + l] - c))
            .collect()
    }
}

pub fn nullspace_basis(n: usize) -> Result<NullspaceBasis, AsqpError> {
    if n < 2 {
        return Err(AsqpError::TooSmall(n));
    }
    let q = n - 1;
    let mut m = Matrix::zeros(n * n, q * q);
    for k in 0..q {
        for l in 0..q {
            let c = k * q + l;
            m.set(k * n + l, c, 1.0);
            m.set(k * n + q, c, -1.0);
            m.set(q * n + l, c, -1.0);
            m.set(q * n + q, c, 1.0);
        }
    }
    Ok(NullspaceBasis { n, matrix: m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsqpReduction {
    /// In `y`; its offset is `h(0)`.
    pub instance: EcqpInstance,
    pub basis: NullspaceBasis,
    /// `h(0) = eᵀAe/n² + 2bᵀe/n`
    pub offset: f64,
}

pub fn to_ecqp(a: &AsqpInstance) -> AsqpReduction {
    let n = a.n;
    let basis = nullspace_basis(n).expect("instances have n ≥ 2");
    let nm = &basis.matrix;
    let center = vec![1.0 / n as f64; n * n];
    let a_center = a.a.mul_vec(&center);
    let offset = dot(&center, &a_center) + 2.0 * dot(&a.b, &center);
    let ap = a.a.congruence(nm);
    let shifted: Vec<f64> = a_center.iter().zip(&a.b).map(|(p, q)| p + q).collect();
    let bp = nm.tr_mul_vec(&shifted);
    let g = 2.0 / n as f64 - 1.0;
    let ellipsoids = (0..n * n)
        .map(|i| Ellipsoid {
            f: Matrix::from_fn(1, nm.cols(), |_, j| 2.0 * nm.get(i, j)),
            g: vec![g],
        })
        .collect();
    let mut instance = EcqpInstance::new(ap, bp, ellipsoids);
    instance.offset = offset;
    AsqpReduction {
        instance,
        basis,
        offset,
    }
}

/// `4/(n²(√r0(n²) + 1 − 2/n)²)`
pub fn g_of(n: usize) -> f64 {
    let nf = n as f64;
    let r = (r0_of(n * n) as f64).sqrt();
    4.0 / (nf * nf * (r + 1.0 - 2.0 / nf).powi(2))
}

/// `1 − 1/(n²(2n−2)) + 1/(n³(2n−2))`
pub fn fu_bound(n: usize) -> f64 {
    let nf = n as f64;
    let k = 2.0 * nf - 2.0;
    1.0 - 1.0 / (nf * nf * k) + 1.0 / (nf * nf * nf * k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsqpResult {
    pub n: usize,
    /// `n × n`
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub f_x: f64,
    pub h0: f64,
    /// Relaxation value of the shifted problem (without `h(0)`).
    pub v_sdp_shifted: f64,
    pub g_n: f64,
    /// `h(0) + g(n)·v_sdp_shifted`
    pub guarantee: f64,
    pub guarantee_holds: bool,
    pub fu_bound: f64,
    pub row_sum_error: f64,
    pub col_sum_error: f64,
    pub min_entry: f64,
    pub max_entry: f64,
    pub certificate: RoundingCertificate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsqpRun {
    pub result: AsqpResult,
    pub reduction: AsqpReduction,
    pub run: PipelineRun,
}

pub fn solve_asqp(a: &AsqpInstance, opts: &PipelineOptions) -> Result<AsqpRun, crate::Error> {
    let n = a.n;
    let reduction = to_ecqp(a);
    let run = run_pipeline(&reduction.instance, opts)?;
    let cert = &run.rounding.certificate;
    let y = cert.x.clone();
    let flat = reduction.basis.lift(&y);
    let x: Vec<Vec<f64>> = flat.chunks(n).map(<[f64]>::to_vec).collect();
    let row_sum_error = x
        .iter()
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let col_sum_error = (0..n)
        .map(|j| (x.iter().map(|r| r[j]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let f_x = a.objective(&flat);
    let g_n = g_of(n);
    let h0 = reduction.offset;
    let guarantee = h0 + g_n * cert.v_sdp;
    let result = AsqpResult {
        n,
        y,
        f_x,
        h0,
        v_sdp_shifted: cert.v_sdp,
        g_n,
        guarantee,
        guarantee_holds: f_x <= guarantee + cert.cert_tol,
        fu_bound: fu_bound(n),
        row_sum_error,
        col_sum_error,
        min_entry: flat.iter().copied().fold(f64::INFINITY, f64::min),
        max_entry: flat.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        certificate: cert.clone(),
        x,
    };
    Ok(AsqpRun {
        result,
        reduction,
        run,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    /// `(f(x) − p̲)/(p̄ − p̲)`, or 0 for a constant objective.
    pub epsilon: f64,
    pub g_n: f64,
    pub fu_bound: f64,
    /// `ε ≤ 1 − g(n) + tol`
    pub within_guarantee: bool,
    /// `g(n) > 1/n³`
    pub beats_cubic: bool,
    /// `1 − g(n) < fu_bound`
    pub beats_fu: bool,
}

pub fn quality_metrics(f_x: f64, p_lower: f64, p_upper: f64, n: usize, tol: f64) -> QualityMetrics {
    let width = p_upper - p_lower;
    let epsilon = if width > 0.0 { (f_x - p_lower) / width } else { 0.0 };
    let g_n = g_of(n);
    let fu = fu_bound(n);
    QualityMetrics {
        epsilon,
        g_n,
        fu_bound: fu,
        within_guarantee: epsilon <= 1.0 - g_n + tol,
        beats_cubic: g_n > 1.0 / (n as f64).powi(3),
        beats_fu: 1.0 - g_n < fu,
    }
}
