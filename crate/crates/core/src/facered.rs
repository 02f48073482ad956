//! Rank reduction along the optimal face.
//!
//! Starting from an optimal `X = V Vᵀ` of rank `r`, any symmetric `Δ` with
//! `⟨VᵀAᵢV, Δ⟩ = 0` for every constraint matrix `Aᵢ` gives a line
//! `V (I + tΔ) Vᵀ` of matrices with identical constraint values. Stepping to
//! the PSD boundary of that line drops the rank. Such a `Δ` exists whenever
//! `r(r+1)/2 ≥ m + 2`, so the loop always reaches [`r0_of`]`(m)`.

use thiserror::Error;

use crate::linalg::{nullspace, psd_factor, sym_eig, sym_nullspace, LinalgError, Matrix, SymMatrix};
use crate::sdpsolve::{ConicProgram, SdpSolution, SolveStatus};

/// Slope of the objective along a face direction accepted without re-solving.
const OBJECTIVE_SLOPE_TOL: f64 = 1e-6;

/// Eigenvalues of `I + tΔ` at or below this are treated as the new kernel.
const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error("reduction needs an optimal solution, got status {0:?}")]
    NotOptimal(SolveStatus),
    #[error(
        "no face direction at rank {rank} > r0 = {r0} ({constraints} constraints); numerical rank is probably overestimated"
    )]
    NoDirection {
        rank: usize,
        r0: usize,
        constraints: usize,
    },
    #[error("objective is not stationary along the only face direction (slope {slope:e})")]
    ObjectiveSlope { slope: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Smallest `r ≥ 1` with `(r + 1)(r + 2) ≥ 2m + 4`, i.e.
/// `⌈(√(8m + 17) − 3) / 2⌉`, computed in integers.
pub fn r0_of(m: usize) -> usize {
    assert!(m >= 1, "r0 is defined for m >= 1");
    let target = 8 * m as u128 + 17;
    let mut s = target.isqrt();
    if s * s < target {
        s += 1;
    }
    // smallest r with 2r + 3 ≥ s
    (s.saturating_sub(3) as usize).div_ceil(2).max(1)
}

/// Rank guarantee for a problem with `m` inequality constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankBudget {
    pub m: usize,
    pub r0: usize,
}

impl RankBudget {
    pub fn new(m: usize) -> Self {
        Self { m, r0: r0_of(m) }
    }

    /// `m + 1 ≤ (r + 2)(r + 1)/2 − 1`
    pub fn admits(&self, r: usize) -> bool {
        self.m + 1 < (r + 2) * (r + 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub initial_rank: usize,
    pub final_rank: usize,
    pub steps: usize,
    /// `|⟨B, X̂⟩ − ⟨B, X⟩|`
    pub objective_drift: f64,
    /// Largest change in any `Bᵏ • X` or `X[n, n]`.
    pub constraint_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub solution: SdpSolution,
    pub report: ReductionReport,
}

fn unit_spectral(delta: &SymMatrix) -> Result<(SymMatrix, f64), LinalgError> {
    let ev = sym_eig(delta)?.values;
    let top = ev[0];
    let bottom = *ev.last().unwrap();
    let radius = top.abs().max(bottom.abs());
    // eigenvalue of largest magnitude; ties go to the positive one
    let lead = if top >= bottom.abs() { top } else { bottom };
    Ok((delta.scaled(1.0 / radius), lead / radius))
}

/// Picks a face direction for the factor `v`, or `None` when only the zero
/// direction is left.
fn face_direction(
    v: &Matrix,
    constraints: &[SymMatrix],
    objective: &SymMatrix,
    scale: f64,
) -> Result<Option<SymMatrix>, ReduceError> {
    let r = v.cols();
    let reduced: Vec<SymMatrix> = constraints.iter().map(|a| a.congruence(v)).collect();
    let basis = sym_nullspace(r, &reduced);
    let Some(first) = basis.first() else {
        return Ok(None);
    };
    let obj = objective.congruence(v);
    let (unit, _) = unit_spectral(first)?;
    let slope = obj.dot(&unit);
    if slope.abs() <= OBJECTIVE_SLOPE_TOL * scale {
        return Ok(Some(first.clone()));
    }
    // add the objective to the orthogonality set
    let coeffs: Vec<f64> = basis.iter().map(|d| obj.dot(d)).collect();
    let Some(alpha) = nullspace(basis.len(), &[coeffs]).into_iter().next() else {
        return Err(ReduceError::ObjectiveSlope { slope });
    };
    let mut delta = SymMatrix::zeros(r);
    for (a, d) in alpha.iter().zip(&basis) {
        delta.axpy(*a, d);
    }
    Ok(Some(delta))
}

/// Moves an optimal solution along its face until its rank is at most
/// `r0_of(m)`. Constraint values are preserved up to rounding.
pub fn reduce_rank(
    sol: &SdpSolution,
    p: &ConicProgram,
    rank_tol: f64,
) -> Result<ReducedSolution, ReduceError> {
    if sol.status != SolveStatus::Optimal {
        return Err(ReduceError::NotOptimal(sol.status));
    }
    let budget = RankBudget::new(p.m());
    let constraints = p.constraint_matrices();
    let factor = psd_factor(&sol.x, rank_tol)?;
    let initial_rank = factor.rank;

    if initial_rank <= budget.r0 {
        return Ok(ReducedSolution {
            solution: SdpSolution {
                rank: initial_rank,
                ..sol.clone()
            },
            report: ReductionReport {
                initial_rank,
                final_rank: initial_rank,
                steps: 0,
                objective_drift: 0.0,
                constraint_drift: 0.0,
            },
        });
    }

    let scale = 1.0 + sol.v_sdp.abs();
    let mut v = factor.columns;
    let mut steps = 0;
    while v.cols() > budget.r0 {
        let r = v.cols();
        let Some(delta) = face_direction(&v, &constraints, &p.objective, scale)? else {
            return Err(ReduceError::NoDirection {
                rank: r,
                r0: budget.r0,
                constraints: constraints.len(),
            });
        };
        let (delta, lead) = unit_spectral(&delta)?;
        let t = -1.0 / lead;
        let mut step = SymMatrix::identity(r);
        step.axpy(t, &delta);
        // V ← V (I + tΔ)^{1/2}, dropping the kernel
        let eig = sym_eig(&step)?;
        let keep: Vec<usize> = (0..r).filter(|&k| eig.values[k] > KERNEL_TOL).collect();
        debug_assert!(keep.len() < r, "face step must drop rank");
        let root = Matrix::from_fn(r, keep.len(), |i, j| {
            eig.vectors.get(i, keep[j]) * eig.values[keep[j]].sqrt()
        });
        v = v.matmul(&root);
        steps += 1;
    }

    let x = v.outer_gram();
    let before = p.constraint_values(&sol.x);
    let after = p.constraint_values(&x);
    let constraint_drift = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let v_before = p.objective.dot(&sol.x);
    let v_sdp = p.objective.dot(&x);
    let final_rank = psd_factor(&x, rank_tol)?.rank;
    Ok(ReducedSolution {
        report: ReductionReport {
            initial_rank,
            final_rank,
            steps,
            objective_drift: (v_sdp - v_before).abs(),
            constraint_drift,
        },
        solution: SdpSolution {
            slacks: after[..p.m()].iter().map(|v| -v).collect(),
            v_sdp,
            rank: final_rank,
            x,
            ..sol.clone()
        },
    })
}
