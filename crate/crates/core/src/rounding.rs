//! Deterministic rounding of a low-rank SDP optimum to a feasible point with a
//! certified approximation ratio.
//!
//! The optimum `X*` is split into rank-one terms `wᵢ = (uᵢ, tᵢ)` that each
//! satisfy `wᵢᵀB*wᵢ ≤ 0`. One term with `tᵢ² ≥ 1/r` is picked, dehomogenized
//! to `x̄ = ±uᵢ/tᵢ`, and pulled back into the feasible set by `τ̄ ∈ (0, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facered::r0_of;
use crate::linalg::{dot, SymMatrix};
use crate::model::{evaluate, homogenize, EcqpInstance, Ellipsoid, HomogenizedProblem, FEAS_TOL};
use crate::onedecomp::{decompose, DecompError, RankOneDecomposition};
use crate::sdpsolve::SdpSolution;

/// `tᵢ` below this counts as zero in candidate selection.
pub const T_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOptions {
    pub cert_tol_abs: f64,
    pub cert_tol_rel: f64,
    /// Slack on `ρ̄ ≤ r` for the selected candidate.
    pub sel_tol: f64,
    pub decomp_tol: f64,
    pub feas_tol: f64,
}

impl Default for RoundOptions {
    fn default() -> Self {
        Self {
            cert_tol_abs: 1e-6,
            cert_tol_rel: 1e-6,
            sel_tol: 1e-6,
            decomp_tol: 1e-9,
            feas_tol: FEAS_TOL,
        }
    }
}

impl RoundOptions {
    pub fn cert_tol(&self, v_sdp: f64) -> f64 {
        self.cert_tol_abs + self.cert_tol_rel * v_sdp.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingCertificate {
    pub x: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub tau_bar: f64,
    /// Lower estimate `(1−γ)/(√r_used + γ)` that `tau_bar` must dominate.
    pub tau_lower: f64,
    pub gamma: f64,
    pub r_used: usize,
    pub r0: usize,
    pub r_tilde: usize,
    pub ratio: f64,
    pub v_sdp: f64,
    pub f_x: f64,
    pub bound: f64,
    pub cert_tol: f64,
    pub residuals: Vec<f64>,
    /// `None` when the origin is already optimal for the relaxation.
    pub selected_index: Option<usize>,
    pub selected_value: Option<f64>,
}

impl RoundingCertificate {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Returns every violated invariant, empty when the certificate holds.
    pub fn violations(&self, feas_tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..1.0).contains(&self.gamma) {
            out.push(format!("gamma {} outside [0,1)", self.gamma));
        }
        if self.r_tilde < 1 {
            out.push("r_tilde < 1".into());
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            out.push(format!("ratio {} outside (0,1]", self.ratio));
        }
        if !(0.0..=1.0).contains(&self.tau_bar) {
            out.push(format!("tau_bar {} outside [0,1]", self.tau_bar));
        }
        if self.tau_bar < self.tau_lower - 1e-9 {
            out.push(format!("tau_bar {} below {}", self.tau_bar, self.tau_lower));
        }
        if self.max_residual() > feas_tol {
            out.push(format!("residual {:e} above {:e}", self.max_residual(), feas_tol));
        }
        if self.f_x > self.bound + self.cert_tol {
            out.push(format!(
                "f(x) = {} exceeds ratio·v_sdp = {} by more than {:e}",
                self.f_x, self.bound, self.cert_tol
            ));
        }
        if self.f_x < self.v_sdp - self.cert_tol {
            out.push(format!("f(x) = {} below v_sdp = {}", self.f_x, self.v_sdp));
        }
        if let Some(rho) = self.selected_value {
            if rho > self.r_used as f64 + 1e-6 {
                out.push(format!("selected value {rho} above r = {}", self.r_used));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoundError {
    #[error("relaxation value {v_sdp} is positive")]
    PositiveValue { v_sdp: f64 },
    #[error("solution rank {rank} exceeds the budget {r0}; reduce it first")]
    RankAboveBudget { rank: usize, r0: usize },
    #[error("X[n,n] = {0} is not positive")]
    DegenerateCorner(f64),
    #[error("every homogenizing coordinate vanishes")]
    NoCandidate,
    #[error("selected candidate has value {value} > r = {rank}")]
    Selection { value: f64, rank: usize },
    #[error("certificate violated: {}", violations.join("; "))]
    Certificate {
        violations: Vec<String>,
        certificate: Box<RoundingCertificate>,
    },
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

/// `B` with its corner replaced by `−v_sdp`.
pub fn build_bstar(h: &HomogenizedProblem, v_sdp: f64) -> SymMatrix {
    let mut b = h.b.clone();
    let n = b.dim() - 1;
    b.set(n, n, -v_sdp);
    b
}

/// `ī = argminᵢ maxₖ ‖Fᵏuᵢ + tᵢgᵏ‖²/tᵢ²`, with `1/0 = ∞`. Ties keep the
/// lowest index.
pub fn select_candidate(
    d: &RankOneDecomposition,
    ellipsoids: &[Ellipsoid],
) -> Result<(usize, f64), RoundError> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..d.len() {
        let t = d.t(i);
        if t.abs() < T_ZERO {
            continue;
        }
        let u = d.u(i);
        let rho = ellipsoids
            .iter()
            .map(|e| {
                let mut v = e.f.mul_vec(u);
                v.iter_mut().zip(&e.g).for_each(|(a, g)| *a += t * g);
                dot(&v, &v) / (t * t)
            })
            .fold(0.0, f64::max);
        if best.is_none_or(|(_, b)| rho < b) {
            best = Some((i, rho));
        }
    }
    best.ok_or(RoundError::NoCandidate)
}

/// Largest `s ≥ 0` with `‖sFᵏd + gᵏ‖² ≤ 1` for every `k`; `∞` when no
/// constraint bounds the ray.
pub fn max_step(d: &[f64], ellipsoids: &[Ellipsoid]) -> f64 {
    ellipsoids
        .iter()
        .map(|e| {
            let fd = e.f.mul_vec(d);
            let a = dot(&fd, &fd);
            if a <= 1e-14 {
                return f64::INFINITY;
            }
            let b = dot(&fd, &e.g);
            let c = dot(&e.g, &e.g) - 1.0;
            // c < 0, so the positive root is (−b + √(b² − ac))/a; use the
            // cancellation-free form when b > 0
            let disc = (b * b - a * c).sqrt();
            if b <= 0.0 {
                (-b + disc) / a
            } else {
                -c / (b + disc)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest `τ ∈ [0, 1]` with `‖τFᵏx̄ + gᵏ‖² ≤ 1` for every `k`.
pub fn compute_tau(x_bar: &[f64], ellipsoids: &[Ellipsoid]) -> f64 {
    max_step(x_bar, ellipsoids).min(1.0)
}

/// `(1−γ)²/(√r + γ)²`
pub fn ratio_bound(gamma: f64, r: usize) -> f64 {
    let q = (1.0 - gamma) / ((r as f64).sqrt() + gamma);
    q * q
}

/// The per-run artifacts behind a certificate, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Rounding {
    pub certificate: RoundingCertificate,
    /// Empty when the origin was returned directly.
    pub decomposition: RankOneDecomposition,
    pub b_star: SymMatrix,
    /// `X* / X*[n,n]`
    pub x_normalized: SymMatrix,
}

/// Rounds a solution whose rank is within the reduction budget.
pub fn round_solution(
    inst: &EcqpInstance,
    sol: &SdpSolution,
    opts: &RoundOptions,
) -> Result<Rounding, RoundError> {
    let n = inst.n();
    let m = inst.m();
    let h = homogenize(inst);
    let r0 = r0_of(m);
    if sol.rank > r0 {
        return Err(RoundError::RankAboveBudget { rank: sol.rank, r0 });
    }
    let corner = sol.x.get(n, n);
    if !(corner > 0.0) {
        return Err(RoundError::DegenerateCorner(corner));
    }
    let x_hat = sol.x.scaled(1.0 / corner);
    let v_sdp = h.b.dot(&x_hat);
    let cert_tol = opts.cert_tol(v_sdp);
    if v_sdp > cert_tol {
        return Err(RoundError::PositiveValue { v_sdp });
    }
    let gamma = inst.gamma();
    let r_tilde = r0.min(n + 1);
    let ratio = ratio_bound(gamma, r_tilde);
    let b_star = build_bstar(&h, v_sdp);

    let finish = |x_bar: Vec<f64>,
                  tau_bar: f64,
                  r_used: usize,
                  selected: Option<(usize, f64)>,
                  decomposition: RankOneDecomposition| {
        let x: Vec<f64> = x_bar.iter().map(|v| tau_bar * v).collect();
        let eval = evaluate(inst, &x);
        let certificate = RoundingCertificate {
            tau_lower: if selected.is_some() {
                (1.0 - gamma) / ((r_used as f64).sqrt() + gamma)
            } else {
                0.0
            },
            x,
            x_bar,
            tau_bar,
            gamma,
            r_used,
            r0,
            r_tilde,
            ratio,
            v_sdp,
            f_x: eval.objective,
            bound: ratio * v_sdp,
            cert_tol,
            residuals: eval.residuals,
            selected_index: selected.map(|s| s.0),
            selected_value: selected.map(|s| s.1),
        };
        let violations = certificate.violations(opts.feas_tol);
        if violations.is_empty() {
            Ok(Rounding {
                certificate,
                decomposition,
                b_star: b_star.clone(),
                x_normalized: x_hat.clone(),
            })
        } else {
            Err(RoundError::Certificate {
                violations,
                certificate: Box::new(certificate),
            })
        }
    };

    if v_sdp >= -cert_tol {
        // nothing beats the origin by more than the tolerance
        let empty = RankOneDecomposition {
            vectors: Vec::new(),
            rotations: 0,
        };
        return finish(vec![0.0; n], 1.0, sol.rank, None, empty);
    }

    let d = decompose(&x_hat, &b_star, opts.decomp_tol)?;
    let r_used = d.len();
    let (idx, rho) = select_candidate(&d, &inst.ellipsoids)?;
    if rho > r_used as f64 + opts.sel_tol {
        return Err(RoundError::Selection {
            value: rho,
            rank: r_used,
        });
    }
    let t = d.t(idx);
    let mut x_bar: Vec<f64> = d.u(idx).iter().map(|u| u / t).collect();
    if dot(&inst.b, &x_bar) > 0.0 {
        x_bar.iter_mut().for_each(|v| *v = -*v);
    }
    let tau_bar = compute_tau(&x_bar, &inst.ellipsoids);
    finish(x_bar, tau_bar, r_used, Some((idx, rho)), d)
}
