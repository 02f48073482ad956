//! End-to-end run: validate, relax, solve, reduce rank, round, and collect
//! the invariant checks into a report.

use serde::{Deserialize, Serialize};

use crate::facered::{r0_of, reduce_rank, ReducedSolution};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::model::{homogenize, validate, EcqpInstance, ValidationReport};
use crate::oracle::OracleEstimate;
use crate::rounding::{round_solution, RoundOptions, Rounding};
use crate::sdpsolve::{build_relaxation, solve_sdp, SdpSolution, SolveStatus, SolverOptions};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    pub round: RoundOptions,
    pub rank_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            round: RoundOptions::default(),
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub solve: f64,
    pub reduce: f64,
    pub round: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub validation: ValidationReport,
    /// Solver output before rank reduction.
    pub raw: SdpSolution,
    pub reduced: ReducedSolution,
    pub rounding: Rounding,
    /// `None` on targets without a clock.
    pub times: Option<StageTimes>,
}

#[cfg(not(target_family = "wasm"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = std::time::Instant::now();
    let out = f();
    (out, Some(start.elapsed().as_secs_f64()))
}

#[cfg(target_family = "wasm")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, Option<f64>) {
    (f(), None)
}

pub fn run_pipeline(inst: &EcqpInstance, opts: &PipelineOptions) -> Result<PipelineRun, Error> {
    let validation = validate(inst)?;
    let program = build_relaxation(&homogenize(inst));
    let (raw, t_solve) = timed(|| solve_sdp(&program, &opts.solver));
    if raw.status != SolveStatus::Optimal {
        return Err(Error::Solver {
            status: raw.status,
            gap: raw.gap,
        });
    }
    let (reduced, t_reduce) = timed(|| reduce_rank(&raw, &program, opts.rank_tol));
    let reduced = reduced?;
    let (rounding, t_round) = timed(|| round_solution(inst, &reduced.solution, &opts.round));
    let rounding = rounding?;
    let times = match (t_solve, t_reduce, t_round) {
        (Some(solve), Some(reduce), Some(round)) => Some(StageTimes { solve, reduce, round }),
        _ => None,
    };
    Ok(PipelineRun {
        validation,
        raw,
        reduced,
        rounding,
        times,
    })
}

/// Numbers behind the decomposition invariants of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDiagnostics {
    /// `‖Σ wᵢwᵢᵀ − X̂‖_F / ‖X̂‖_F`
    pub reconstruction: f64,
    /// `maxᵢ wᵢᵀB*wᵢ / (1 + ‖B*‖_F ‖X̂‖_F)`
    pub max_form: f64,
    pub t_squared_sum: f64,
    /// `maxₖ ‖Fᵏu_ī/t_ī + gᵏ‖ − √r`, or `None` without a selected term.
    pub candidate_excess: Option<f64>,
}

impl PipelineRun {
    pub fn decomposition_diagnostics(&self) -> DecompositionDiagnostics {
        let r = &self.rounding;
        let d = &r.decomposition;
        let x = &r.x_normalized;
        let recon = if d.is_empty() {
            0.0
        } else {
            d.reconstruct(x.dim()).sub(x).frobenius() / x.frobenius()
        };
        let scale = 1.0 + r.b_star.frobenius() * x.frobenius();
        let max_form = d
            .forms(&r.b_star)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            / scale;
        let c = &r.certificate;
        DecompositionDiagnostics {
            reconstruction: recon,
            max_form: if d.is_empty() { 0.0 } else { max_form },
            t_squared_sum: if d.is_empty() { 1.0 } else { d.t_squared_sum() },
            candidate_excess: c
                .selected_value
                .map(|v| v.sqrt() - (c.r_used as f64).sqrt()),
        }
    }
}

/// One invariant: passes iff `value ≤ limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// SHA-256 of the instance's canonical JSON.
    pub digest: String,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub v_sdp: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub rank_before: usize,
    pub rank_after: usize,
    pub r0: usize,
    pub reduction_steps: usize,
    pub certificate: crate::rounding::RoundingCertificate,
    pub decomposition: DecompositionDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<OracleEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub times: Option<StageTimes>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn instance_digest(inst: &EcqpInstance) -> String {
    use sha2::{Digest, Sha256};
    let canonical = crate::json::to_string(&inst.to_json());
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Tolerances for the report checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    pub gap: f64,
    pub complementarity: f64,
    pub objective_drift: f64,
    pub constraint_drift: f64,
    pub reconstruction: f64,
    pub form: f64,
    pub t_sum: f64,
    pub candidate: f64,
    pub feasibility: f64,
    pub sandwich: f64,
    pub oracle_upper: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            gap: 1e-8,
            complementarity: 1e-7,
            objective_drift: 1e-7,
            constraint_drift: 1e-8,
            reconstruction: 1e-8,
            form: 1e-7,
            t_sum: 1e-8,
            candidate: 1e-6,
            feasibility: 1e-8,
            sandwich: 1e-6,
            oracle_upper: 1e-9,
        }
    }
}

pub fn build_report(
    inst: &EcqpInstance,
    run: &PipelineRun,
    oracle: Option<OracleEstimate>,
    with_times: bool,
    tol: &CheckTolerances,
) -> RunReport {
    let cert = &run.rounding.certificate;
    let raw = &run.raw;
    let rep = &run.reduced.report;
    let scale = 1.0 + raw.v_sdp.abs();
    let diag = run.decomposition_diagnostics();
    let r0 = r0_of(inst.m());
    let mut checks = vec![
        Check::new("sdp_gap", raw.gap, tol.gap),
        Check::new(
            "complementarity",
            raw.complementarity().map_or(0.0, f64::abs) / scale,
            tol.complementarity,
        ),
        Check::new("rank_budget", rep.final_rank as f64, r0 as f64),
        Check::new("objective_drift", rep.objective_drift / scale, tol.objective_drift),
        Check::new("constraint_drift", rep.constraint_drift, tol.constraint_drift),
        Check::new("reconstruction", diag.reconstruction, tol.reconstruction),
        Check::new("decomposition_forms", diag.max_form, tol.form),
        Check::new("t_squared_sum", (diag.t_squared_sum - 1.0).abs(), tol.t_sum),
        Check::new("candidate_bound", diag.candidate_excess.unwrap_or(0.0), tol.candidate),
        Check::new("feasibility", cert.max_residual(), tol.feasibility),
        Check::new("ratio_bound", cert.f_x - cert.bound, cert.cert_tol),
        Check::new("sdp_lower_bound", cert.v_sdp - cert.f_x, tol.sandwich),
    ];
    if let Some(o) = &oracle {
        checks.push(Check::new("oracle_above_sdp", cert.v_sdp - o.best_value, tol.sandwich));
        checks.push(Check::new("oracle_below_rounded", o.best_value - cert.f_x, tol.oracle_upper));
    }
    let pass = checks.iter().all(|c| c.pass);
    RunReport {
        digest: instance_digest(inst),
        n: inst.n(),
        m: inst.m(),
        gamma: run.validation.gamma,
        v_sdp: raw.v_sdp,
        dual_objective: raw.dual_objective,
        gap: raw.gap,
        iterations: raw.iterations,
        status: raw.status,
        rank_before: rep.initial_rank,
        rank_after: rep.final_rank,
        r0,
        reduction_steps: rep.steps,
        certificate: cert.clone(),
        decomposition: diag,
        oracle,
        times: if with_times { run.times } else { None },
        checks,
        pass,
    }
}
