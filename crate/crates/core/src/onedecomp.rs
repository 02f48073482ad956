//! Rank-one decomposition of a PSD matrix against one quadratic form.
//!
//! For `X ⪰ 0` of rank `r` with `M • X ≤ 0`, produce `X = Σ wᵢwᵢᵀ` with every
//! `wᵢᵀMwᵢ ≤ 0`. Starting from the eigen-factor, each rotation mixes a pair
//! with opposite-sign forms so that one of them lands exactly on zero.

use thiserror::Error;

use crate::linalg::{psd_factor, LinalgError, SymMatrix, DEFAULT_RANK_TOL};

pub const DEFAULT_DECOMP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("M•X positive: {value:e} exceeds tolerance {threshold:e}")]
    PositiveTrace { value: f64, threshold: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneDecomposition {
    /// `wᵢ = (uᵢ, tᵢ)`
    pub vectors: Vec<Vec<f64>>,
    pub rotations: usize,
}

impl RankOneDecomposition {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Leading block `uᵢ` (all but the last entry).
    pub fn u(&self, i: usize) -> &[f64] {
        let w = &self.vectors[i];
        &w[..w.len() - 1]
    }

    /// Last entry `tᵢ`.
    pub fn t(&self, i: usize) -> f64 {
        *self.vectors[i].last().unwrap()
    }

    pub fn t_squared_sum(&self) -> f64 {
        (0..self.len()).map(|i| self.t(i).powi(2)).sum()
    }

    pub fn reconstruct(&self, dim: usize) -> SymMatrix {
        let mut x = SymMatrix::zeros(dim);
        for w in &self.vectors {
            x.axpy(1.0, &SymMatrix::outer(w));
        }
        x
    }

    pub fn forms(&self, m: &SymMatrix) -> Vec<f64> {
        self.vectors.iter().map(|w| m.quad_form(w)).collect()
    }
}

/// Root of `a + 2cγ + dγ² = 0` with the smaller magnitude, for `a > 0 > d`.
fn balancing_root(a: f64, c: f64, d: f64) -> f64 {
    let disc = (c * c - a * d).sqrt();
    let q = -(c + if c >= 0.0 { disc } else { -disc });
    let (r1, r2) = (q / d, a / q);
    if r1.abs() <= r2.abs() {
        r1
    } else {
        r2
    }
}

/// Decomposes `x` so that every rank-one term has a nonpositive `m`-form
/// (up to `tol·(1 + ‖M‖_F‖X‖_F)`).
pub fn decompose(x: &SymMatrix, m: &SymMatrix, tol: f64) -> Result<RankOneDecomposition, DecompError> {
    let threshold = tol * (1.0 + m.frobenius() * x.frobenius());
    let total = m.dot(x);
    if total > threshold {
        return Err(DecompError::PositiveTrace {
            value: total,
            threshold,
        });
    }
    let factor = psd_factor(x, DEFAULT_RANK_TOL)?;
    let mut p: Vec<Vec<f64>> = (0..factor.rank).map(|k| factor.column(k)).collect();
    let mut forms: Vec<f64> = p.iter().map(|w| m.quad_form(w)).collect();
    let mut settled = vec![false; p.len()];
    let mut rotations = 0;

    loop {
        let live = || (0..p.len()).filter(|&k| !settled[k]);
        // lowest index wins ties
        let Some(i) = live().fold(None, |best: Option<usize>, k| match best {
            Some(b) if forms[b] >= forms[k] => Some(b),
            _ => Some(k),
        }) else {
            break;
        };
        if forms[i] <= threshold {
            break;
        }
        let j = live()
            .filter(|&k| k != i)
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if forms[b] <= forms[k] => Some(b),
                _ => Some(k),
            });
        let Some(j) = j.filter(|&j| forms[j] < 0.0) else {
            // no negative partner left: the total must have been positive
            let value = forms.iter().sum();
            return Err(DecompError::PositiveTrace { value, threshold });
        };

        let a = forms[i];
        let d = forms[j];
        let c = m.bilinear(&p[i], &p[j]);
        let gamma = balancing_root(a, c, d);
        let norm = (1.0 + gamma * gamma).sqrt();
        let (pi, pj) = (&p[i], &p[j]);
        let new_i: Vec<f64> = pi.iter().zip(pj).map(|(x, y)| (x + gamma * y) / norm).collect();
        let new_j: Vec<f64> = pi.iter().zip(pj).map(|(x, y)| (gamma * x - y) / norm).collect();
        p[i] = new_i;
        p[j] = new_j;
        // the pair sum is invariant; assign the remainder to j to keep it exact
        forms[i] = 0.0;
        forms[j] = a + d;
        settled[i] = true;
        rotations += 1;
    }

    Ok(RankOneDecomposition {
        vectors: p,
        rotations,
    })
}
