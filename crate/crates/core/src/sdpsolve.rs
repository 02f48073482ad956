//! The semidefinite relaxation of a homogenized ECQP and a dense
//! primal-dual interior-point solver for it.
//!
//! Primal:
//!
//! ```text
//!     min  ⟨B, X⟩
//!     s.t. ⟨Bᵏ, X⟩ + sₖ = 0,   k = 1..m
//!          X[n, n]      = 1
//!          X ⪰ 0, s ≥ 0
//! ```
//!
//! The slack orthant is handled as `m` one-by-one PSD blocks, so a single
//! Nesterov–Todd scaling code path covers both cones. Each iteration is a
//! Mehrotra predictor-corrector step computed in the scaled space where
//! `X̃ = Z̃ = diag(λ)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    cholesky, cholesky_solve, norm, psd_factor, sym_eig, LinalgError, Matrix, SymMatrix,
    DEFAULT_RANK_TOL,
};
use crate::model::HomogenizedProblem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("solution JSON does not match the program: {0}")]
    Mismatch(String),
}

/// The relaxation in conic form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub objective: SymMatrix,
    /// `Bᵏ • X + sₖ = 0`
    pub inequalities: Vec<SymMatrix>,
}

impl ConicProgram {
    /// PSD block dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn m(&self) -> usize {
        self.inequalities.len()
    }

    /// The unit matrix selecting `X[n, n]`.
    pub fn equality_matrix(&self) -> SymMatrix {
        let d = self.dim();
        let mut e = SymMatrix::zeros(d);
        e.set(d - 1, d - 1, 1.0);
        e
    }

    /// Inequality matrices followed by the equality matrix (`m + 1` entries).
    pub fn constraint_matrices(&self) -> Vec<SymMatrix> {
        let mut all = self.inequalities.clone();
        all.push(self.equality_matrix());
        all
    }

    /// `Bᵏ • X` for each inequality, then `X[n, n]`.
    pub fn constraint_values(&self, x: &SymMatrix) -> Vec<f64> {
        let mut v: Vec<f64> = self.inequalities.iter().map(|bk| bk.dot(x)).collect();
        v.push(x.get(self.dim() - 1, self.dim() - 1));
        v
    }

    /// Largest violation of `Bᵏ • X ≤ 0` and `X[n, n] = 1`.
    pub fn max_violation(&self, x: &SymMatrix) -> f64 {
        let vals = self.constraint_values(x);
        let m = self.m();
        vals[..m]
            .iter()
            .map(|&v| v.max(0.0))
            .fold((vals[m] - 1.0).abs(), f64::max)
    }
}

pub fn build_relaxation(h: &HomogenizedProblem) -> ConicProgram {
    ConicProgram {
        objective: h.b.clone(),
        inequalities: h.bk.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)`.
    pub gap_tol: f64,
    /// Relative primal and dual residual norms.
    pub feas_tol: f64,
    /// Iteration continues past `gap_tol` until gap, residuals and
    /// complementarity all reach this level, or progress stalls.
    pub polish_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    pub rank_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-9,
            polish_tol: 1e-13,
            max_iter: 200,
            step_fraction: 0.98,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Dual variables: `B − Σ yₖBᵏ − y_eq E = Z ⪰ 0` and `−yₖ = zₖ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    /// `m` inequality multipliers followed by the equality multiplier.
    pub y: Vec<f64>,
    pub z: SymMatrix,
    pub slack_duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: SymMatrix,
    pub slacks: Vec<f64>,
    /// Absent when the solution was imported from JSON.
    pub dual: Option<DualState>,
    /// `⟨B, X⟩`
    pub v_sdp: f64,
    pub dual_objective: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub rank: usize,
}

impl SdpSolution {
    /// `⟨X, Z⟩ + sᵀz`, or `None` without duals.
    pub fn complementarity(&self) -> Option<f64> {
        self.dual.as_ref().map(|d| {
            self.x.dot(&d.z)
                + self
                    .slacks
                    .iter()
                    .zip(&d.slack_duals)
                    .map(|(s, z)| s * z)
                    .sum::<f64>()
        })
    }

    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            x: self.x.to_rows(),
            v_sdp: self.v_sdp,
            gap: self.gap,
            status: self.status.as_str().to_string(),
            rank: self.rank,
        }
    }

    /// Imports an externally computed solution; objective and slacks are
    /// recomputed from `X` against `p`.
    pub fn from_json(j: &SolutionJson, p: &ConicProgram, rank_tol: f64) -> Result<Self, SolveError> {
        let x = SymMatrix::from_rows(&j.x, 1e-9)?;
        if x.dim() != p.dim() {
            return Err(SolveError::Mismatch(format!(
                "X is {}×{}, program needs {}",
                x.dim(),
                x.dim(),
                p.dim()
            )));
        }
        let status = match j.status.as_str() {
            "optimal" => SolveStatus::Optimal,
            "max_iter" => SolveStatus::MaxIter,
            "numerical_failure" => SolveStatus::NumericalFailure,
            other => return Err(SolveError::Mismatch(format!("unknown status {other:?}"))),
        };
        let slacks = p.inequalities.iter().map(|bk| -bk.dot(&x)).collect();
        let rank = psd_factor(&x, rank_tol)?.rank;
        Ok(Self {
            v_sdp: p.objective.dot(&x),
            dual_objective: j.v_sdp,
            primal_residual: p.max_violation(&x),
            dual_residual: f64::NAN,
            x,
            slacks,
            dual: None,
            gap: j.gap,
            iterations: 0,
            status,
            rank,
        })
    }
}

/// Solution exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    pub v_sdp: f64,
    pub gap: f64,
    pub status: String,
    pub rank: usize,
}

/// NT scaling of the PSD block: `G Gᵀ = W`, `W Z W = X`, `GᵀZG = G⁻¹XG⁻ᵀ = diag(λ)`.
struct BlockScaling {
    g: Matrix,
    lambda: Vec<f64>,
}

fn nt_scaling(x: &SymMatrix, z: &SymMatrix) -> Result<BlockScaling, LinalgError> {
    let n = x.dim();
    let ex = sym_eig(x)?;
    if ex.values.iter().any(|&v| v <= 0.0) {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let sq: Vec<f64> = ex.values.iter().map(|v| v.sqrt()).collect();
    // X = L Lᵀ with L = Q diag(√λ)
    let l = Matrix::from_fn(n, n, |i, j| ex.vectors.get(i, j) * sq[j]);
    let k = z.congruence(&l);
    let ek = sym_eig(&k)?;
    if ek.values.iter().any(|&v| v <= 0.0) {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let quarter: Vec<f64> = ek.values.iter().map(|d| d.powf(0.25)).collect();
    let lu = l.matmul(&ek.vectors);
    let g = Matrix::from_fn(n, n, |i, j| lu.get(i, j) / quarter[j]);
    let lambda = ek.values.iter().map(|d| d.sqrt()).collect();
    Ok(BlockScaling { g, lambda })
}

/// Largest `α` with `diag(λ) + α D ⪰ 0`.
fn max_step_psd(lambda: &[f64], d: &SymMatrix) -> Result<f64, LinalgError> {
    let isq: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let t = SymMatrix::from_fn(lambda.len(), |i, j| isq[i] * d.get(i, j) * isq[j]);
    let lmin = t.min_eigenvalue()?;
    Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn max_step_lp(lambda: &[f64], d: &[f64]) -> f64 {
    lambda
        .iter()
        .zip(d)
        .filter(|(_, &di)| di < 0.0)
        .map(|(l, di)| -l / di)
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric part of `A B`.
fn sym_product(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let n = a.dim();
    let ab = a.as_matrix().matmul(&b.as_matrix());
    SymMatrix::from_fn(n, |i, j| 0.5 * (ab.get(i, j) + ab.get(j, i)))
}

struct Direction {
    dy: Vec<f64>,
    dx: SymMatrix,
    dz: SymMatrix,
    dxs: Vec<f64>,
    dzs: Vec<f64>,
}

/// Per-iteration linear algebra in the scaled space.
struct NewtonSystem<'a> {
    lambda: &'a [f64],
    lambda_s: &'a [f64],
    /// `√(s/z)` per slack.
    ws: &'a [f64],
    scaled_a: &'a [SymMatrix],
    rd: &'a SymMatrix,
    rds: &'a [f64],
    rp: &'a [f64],
    chol: &'a Matrix,
}

impl NewtonSystem<'_> {
    /// Solves with complementarity right-hand sides `r` (PSD) and `rs` (slacks).
    fn solve(&self, r: &SymMatrix, rs: &[f64]) -> Direction {
        let m = self.ws.len();
        let lam = self.lambda;
        let h = SymMatrix::from_fn(lam.len(), |i, j| 2.0 * r.get(i, j) / (lam[i] + lam[j]));
        let hs: Vec<f64> = rs.iter().zip(self.lambda_s).map(|(r, l)| r / l).collect();
        let hd = h.sub(self.rd);
        let rhs: Vec<f64> = (0..=m)
            .map(|i| {
                let mut v = self.rp[i] - self.scaled_a[i].dot(&hd);
                if i < m {
                    v -= self.ws[i] * (hs[i] - self.rds[i]);
                }
                v
            })
            .collect();
        let dy = cholesky_solve(self.chol, &rhs);
        let mut dz = self.rd.clone();
        for (a, yi) in self.scaled_a.iter().zip(&dy) {
            dz.axpy(-yi, a);
        }
        let dzs: Vec<f64> = (0..m).map(|i| self.rds[i] - dy[i] * self.ws[i]).collect();
        let dx = h.sub(&dz);
        let dxs = hs.iter().zip(&dzs).map(|(h, z)| h - z).collect();
        Direction { dy, dx, dz, dxs, dzs }
    }

    fn steps(&self, d: &Direction) -> Result<(f64, f64), LinalgError> {
        let ap = max_step_psd(self.lambda, &d.dx)?.min(max_step_lp(self.lambda_s, &d.dxs));
        let ad = max_step_psd(self.lambda, &d.dz)?.min(max_step_lp(self.lambda_s, &d.dzs));
        Ok((ap, ad))
    }
}

/// Primal-dual path following with Mehrotra predictor-corrector steps.
pub fn solve_sdp(p: &ConicProgram, opts: &SolverOptions) -> SdpSolution {
    let n = p.dim();
    let m = p.m();
    let nu = (n + m) as f64;
    let constraints = p.constraint_matrices();
    let b_norm = 1.0; // ‖(0, …, 0, 1)‖
    let c_norm = p.objective.frobenius();

    let rho = 1.0
        + constraints
            .iter()
            .chain(std::iter::once(&p.objective))
            .map(SymMatrix::frobenius)
            .fold(0.0, f64::max);
    let mut x = SymMatrix::identity(n).scaled(rho);
    let mut s = vec![rho; m];
    let mut z = SymMatrix::identity(n).scaled(rho);
    let mut zs = vec![rho; m];
    let mut y = vec![0.0; m + 1];

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let (mut pobj, mut dobj, mut gap, mut pinf, mut dinf);
    let mut accepted: Option<SdpSolution> = None;

    loop {
        // residuals
        let mut rp: Vec<f64> = (0..m).map(|k| -(constraints[k].dot(&x) + s[k])).collect();
        rp.push(1.0 - x.get(n - 1, n - 1));
        let mut rd = p.objective.sub(&z);
        for (a, yi) in constraints.iter().zip(&y) {
            rd.axpy(-yi, a);
        }
        let rds: Vec<f64> = (0..m).map(|k| -y[k] - zs[k]).collect();

        pobj = p.objective.dot(&x);
        dobj = y[m];
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        pinf = norm(&rp) / (1.0 + b_norm);
        dinf = (rd.frobenius().powi(2) + rds.iter().map(|v| v * v).sum::<f64>()).sqrt()
            / (1.0 + c_norm);
        let comp = x.dot(&z) + s.iter().zip(&zs).map(|(a, b)| a * b).sum::<f64>();
        let mu = comp / nu;

        let converged = |tol: f64, feas: f64| {
            gap <= tol && pinf <= feas && dinf <= feas && comp <= tol * (1.0 + pobj.abs())
        };
        if converged(opts.polish_tol, opts.polish_tol) {
            status = SolveStatus::Optimal;
            break;
        }
        if converged(opts.gap_tol, opts.feas_tol) {
            accepted = Some(SdpSolution {
                x: x.clone(),
                slacks: s.clone(),
                dual: Some(DualState {
                    y: y.clone(),
                    z: z.clone(),
                    slack_duals: zs.clone(),
                }),
                v_sdp: pobj,
                dual_objective: dobj,
                gap,
                primal_residual: pinf,
                dual_residual: dinf,
                iterations,
                status: SolveStatus::Optimal,
                rank: 0,
            });
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let step = (|| -> Result<(), LinalgError> {
            let sc = nt_scaling(&x, &z)?;
            let ws: Vec<f64> = s.iter().zip(&zs).map(|(a, b)| (a / b).sqrt()).collect();
            let lambda_s: Vec<f64> = s.iter().zip(&zs).map(|(a, b)| (a * b).sqrt()).collect();

            let scaled_a: Vec<SymMatrix> = constraints.iter().map(|a| a.congruence(&sc.g)).collect();
            let rd_t = rd.congruence(&sc.g);
            let rds_t: Vec<f64> = rds.iter().zip(&ws).map(|(r, w)| r * w).collect();

            let mut schur = SymMatrix::from_fn(m + 1, |i, j| scaled_a[i].dot(&scaled_a[j]));
            for k in 0..m {
                schur.set(k, k, schur.get(k, k) + ws[k] * ws[k]);
            }
            let chol = match cholesky(&schur) {
                Ok(l) => l,
                Err(_) => {
                    let reg = 1e-14 * (1.0 + schur.trace());
                    let mut shifted = schur.clone();
                    for k in 0..=m {
                        shifted.set(k, k, shifted.get(k, k) + reg);
                    }
                    cholesky(&shifted)?
                }
            };
            let sys = NewtonSystem {
                lambda: &sc.lambda,
                lambda_s: &lambda_s,
                ws: &ws,
                scaled_a: &scaled_a,
                rd: &rd_t,
                rds: &rds_t,
                rp: &rp,
                chol: &chol,
            };

            let v2 = SymMatrix::diag(&sc.lambda.iter().map(|l| l * l).collect::<Vec<_>>());
            let v2s: Vec<f64> = lambda_s.iter().map(|l| l * l).collect();

            // predictor
            let aff = sys.solve(&v2.scaled(-1.0), &v2s.iter().map(|v| -v).collect::<Vec<_>>());
            let (ap, ad) = sys.steps(&aff)?;
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let vdiag = SymMatrix::diag(&sc.lambda);
            let mut xa = vdiag.clone();
            xa.axpy(ap, &aff.dx);
            let mut za = vdiag;
            za.axpy(ad, &aff.dz);
            let comp_aff = xa.dot(&za)
                + (0..m)
                    .map(|k| (lambda_s[k] + ap * aff.dxs[k]) * (lambda_s[k] + ad * aff.dzs[k]))
                    .sum::<f64>();
            let sigma = (comp_aff / comp).clamp(0.0, 1.0).powi(3);

            // corrector
            let mut r = SymMatrix::identity(n).scaled(sigma * mu);
            r.axpy(-1.0, &v2);
            r.axpy(-1.0, &sym_product(&aff.dx, &aff.dz));
            let rs: Vec<f64> = (0..m)
                .map(|k| sigma * mu - v2s[k] - aff.dxs[k] * aff.dzs[k])
                .collect();
            let dir = sys.solve(&r, &rs);
            let (ap, ad) = sys.steps(&dir)?;
            let ap = (opts.step_fraction * ap).min(1.0);
            let ad = (opts.step_fraction * ad).min(1.0);

            x.axpy(ap, &dir.dx.congruence(&sc.g.transpose()));
            // dZ from the linear dual equation in the original space rather
            // than back-transformed through the scaling, which can be badly
            // conditioned near the optimum; this keeps the dual residual at
            // round-off relative to ‖C‖
            let mut dz = rd.clone();
            for (a, dyi) in constraints.iter().zip(&dir.dy) {
                dz.axpy(-dyi, a);
            }
            z.axpy(ad, &dz);
            for k in 0..m {
                s[k] += ap * ws[k] * dir.dxs[k];
                zs[k] += ad * dir.dzs[k] / ws[k];
            }
            for (yi, dyi) in y.iter_mut().zip(&dir.dy) {
                *yi += ad * dyi;
            }
            if ap.max(ad) < 1e-12 {
                return Err(LinalgError::NotPositiveDefinite);
            }
            Ok(())
        })();

        if step.is_err() {
            status = SolveStatus::NumericalFailure;
            break;
        }
    }

    if status != SolveStatus::Optimal {
        if let Some(mut sol) = accepted {
            sol.rank = psd_factor(&sol.x, opts.rank_tol).map(|f| f.rank).unwrap_or(n);
            return sol;
        }
    }
    let rank = psd_factor(&x, opts.rank_tol).map(|f| f.rank).unwrap_or(n);
    SdpSolution {
        v_sdp: pobj,
        dual_objective: dobj,
        gap,
        primal_residual: pinf,
        dual_residual: dinf,
        iterations,
        status,
        rank,
        x,
        slacks: s,
        dual: Some(DualState {
            y,
            z,
            slack_duals: zs,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::{homogenize, random_instance, Ellipsoid, EcqpInstance, InstanceSpec};
    use approx::assert_relative_eq;

    fn program(inst: &EcqpInstance) -> ConicProgram {
        build_relaxation(&homogenize(inst))
    }

    pub(crate) fn scalar_instance() -> EcqpInstance {
        EcqpInstance::new(SymMatrix::diag(&[-1.0]), vec![1.0], vec![Ellipsoid::ball(1)])
    }

    fn check_optimal(sol: &SdpSolution) {
        assert_eq!(sol.status, SolveStatus::Optimal, "{sol:?}");
        assert!(sol.gap <= 1e-8);
        assert!(sol.primal_residual <= 1e-8 && sol.dual_residual <= 1e-8);
        assert!(sol.x.min_eigenvalue().unwrap() >= -1e-8);
        let comp = sol.complementarity().unwrap();
        assert!(comp.abs() <= 1e-7 * (1.0 + sol.v_sdp.abs()), "comp {comp}");
    }

    #[test]
    fn relaxation_dimensions() {
        let p = program(&EcqpInstance::new(
            SymMatrix::diag(&[1.0]),
            vec![0.0],
            vec![Ellipsoid::ball(1)],
        ));
        assert_eq!(p.dim(), 2);
        assert_eq!(p.m(), 1);
        assert_eq!(p.constraint_matrices().len(), 2);
    }

    #[test]
    fn lifted_origin_is_feasible() {
        let inst = random_instance(4, 3, 3, &InstanceSpec::default()).unwrap();
        let p = program(&inst);
        let mut x = SymMatrix::zeros(4);
        x.set(3, 3, 1.0);
        let vals = p.constraint_values(&x);
        for (k, e) in inst.ellipsoids.iter().enumerate() {
            let slack = -vals[k];
            assert_relative_eq!(slack, 1.0 - crate::linalg::dot(&e.g, &e.g), epsilon = 1e-15);
            assert!(slack > 0.0);
        }
        assert_eq!(vals[3], 1.0);
    }

    #[test]
    fn scalar_oracle_instance() {
        let sol = solve_sdp(&program(&scalar_instance()), &SolverOptions::default());
        check_optimal(&sol);
        assert!((sol.v_sdp + 3.0).abs() <= 1e-6, "{}", sol.v_sdp);
        assert_eq!(sol.rank, 1);
        // X ≈ [x;1][x;1]ᵀ with x = −1
        assert!((sol.x.get(0, 1) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn concave_ball() {
        let inst = EcqpInstance::new(SymMatrix::diag(&[-1.0, -1.0]), vec![0.0; 2], vec![Ellipsoid::ball(2)]);
        let sol = solve_sdp(&program(&inst), &SolverOptions::default());
        check_optimal(&sol);
        assert!((sol.v_sdp + 1.0).abs() <= 1e-7);
    }

    #[test]
    fn convex_ball_is_trivial() {
        let inst = EcqpInstance::new(SymMatrix::identity(2), vec![0.0; 2], vec![Ellipsoid::ball(2)]);
        let sol = solve_sdp(&program(&inst), &SolverOptions::default());
        check_optimal(&sol);
        assert!(sol.v_sdp.abs() <= 1e-7);
        let mut e3 = SymMatrix::zeros(3);
        e3.set(2, 2, 1.0);
        assert!(sol.x.sub(&e3).frobenius() < 1e-6);
        assert_eq!(sol.rank, 1);
    }

    #[test]
    fn asqp_sized_program() {
        // four scalar constraints (±2y)² ≤ 1
        let ells = [2.0, -2.0, -2.0, 2.0]
            .iter()
            .map(|&c| Ellipsoid {
                f: Matrix::from_rows(&[vec![c]]).unwrap(),
                g: vec![0.0],
            })
            .collect();
        let p = program(&EcqpInstance::new(SymMatrix::diag(&[-4.0]), vec![0.0], ells));
        assert_eq!((p.dim(), p.m()), (2, 4));
        let sol = solve_sdp(&p, &SolverOptions::default());
        check_optimal(&sol);
        assert!((sol.v_sdp + 1.0).abs() < 1e-7);
    }

    #[test]
    fn random_instances_converge() {
        for seed in 0..30 {
            for &(n, m) in &[(2, 1), (5, 3), (10, 10)] {
                let inst = random_instance(seed, n, m, &InstanceSpec::default()).unwrap();
                let sol = solve_sdp(&program(&inst), &SolverOptions::default());
                check_optimal(&sol);
                assert!(sol.v_sdp <= 1e-8);
                // weak duality at the returned iterate
                assert!(sol.v_sdp >= sol.dual_objective - 1e-7 * (1.0 + sol.v_sdp.abs()));
            }
        }
    }

    #[test]
    fn max_iter_is_reported() {
        let opts = SolverOptions {
            max_iter: 2,
            ..SolverOptions::default()
        };
        let sol = solve_sdp(&program(&scalar_instance()), &opts);
        assert_eq!(sol.status, SolveStatus::MaxIter);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn json_import() {
        let p = program(&scalar_instance());
        let sol = solve_sdp(&p, &SolverOptions::default());
        let text = serde_json::to_string(&sol.to_json()).unwrap();
        let j: SolutionJson = serde_json::from_str(&text).unwrap();
        let imported = SdpSolution::from_json(&j, &p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(imported.x, sol.x);
        assert_eq!(imported.rank, sol.rank);
        assert_eq!(imported.status, SolveStatus::Optimal);
        assert!(imported.dual.is_none());

        let mut bad = j.clone();
        bad.status = "solved".into();
        assert!(SdpSolution::from_json(&bad, &p, DEFAULT_RANK_TOL).is_err());
    }
}
