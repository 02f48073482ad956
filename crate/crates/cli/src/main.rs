//! `ecqp` command-line front end. JSON in and out everywhere (CSV for tables);
//! floats are printed at 17 significant digits so repeated runs are
//! byte-identical. Exit codes: 1 invariant failure, 2 input error, 3 solver
//! failure.

use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecqp::asqp::{random_asqp, solve_asqp, AsqpInstance, AsqpJson};
use ecqp::bounds::{bound_values, crossover_sweep, to_csv, CrossoverReport, MuRule};
use ecqp::model::{homogenize, random_instance, EcqpInstance, InstanceJson, InstanceSpec};
use ecqp::oracle::{best_feasible_search, Budget};
use ecqp::pipeline::{build_report, instance_digest, run_pipeline, CheckTolerances, PipelineOptions, StageTimes};
use ecqp::sdpsolve::{build_relaxation, solve_sdp, SolveStatus};
use ecqp::ErrorKind;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: invalid JSON: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ecqp::Error),
    /// Output was produced but a requested check failed.
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Invariant => 1,
                ErrorKind::Input => 2,
                ErrorKind::Solver => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "ecqp", version, about = "SDP rounding for nonconvex quadratic programs over ellipsoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Solve the SDP relaxation only.
    Solve(SolveArgs),
    /// Full pipeline; writes the rounding certificate.
    Round(SolveArgs),
    /// Quadratic program over the doubly stochastic matrices.
    Asqp(AsqpArgs),
    /// CSV (or JSON) of the closed-form ratios over a range of m.
    BoundsTable(TableArgs),
    /// Sweep m and report where the rank-based ratio stops beating 1/(2 ln(2(m+1)μ)).
    Crossover(CrossoverArgs),
    /// Pipeline plus oracle plus every invariant check.
    Verify(VerifyArgs),
    /// Batch over seeds with timings.
    Bench(BenchArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TolArgs {
    /// Relative duality-gap tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-8)]
    gap_tol: f64,
    /// Absolute slack on the certificate inequality (plus the same relative to |v_sdp|).
    #[arg(long, default_value_t = 1e-6)]
    cert_tol: f64,
    /// Interior-point iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

impl TolArgs {
    fn options(&self) -> Result<PipelineOptions, CliError> {
        if !(self.gap_tol > 0.0 && self.cert_tol >= 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        let mut o = PipelineOptions::default();
        o.solver.gap_tol = self.gap_tol;
        o.solver.max_iter = self.max_iter;
        o.round.cert_tol_abs = self.cert_tol;
        o.round.cert_tol_rel = self.cert_tol;
        Ok(o)
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma_max: f64,
    /// Every constraint a unit ball (forces gamma = 0).
    #[arg(long)]
    ball: bool,
    /// Emit an assignment-polytope instance of size n instead.
    #[arg(long)]
    asqp: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct AsqpArgs {
    /// Instance JSON with fields n, A (n²×n²), b; a seeded random instance when omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("need 1 ≤ lo ≤ hi, got {s:?}"));
    }
    Ok(lo..=hi)
}

#[derive(Args)]
struct TableArgs {
    /// Inclusive range `lo..hi` of constraint counts.
    #[arg(long, value_parser = parse_range, default_value = "1..10")]
    m: RangeInclusive<usize>,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Dimension; r̃ = min(r0, n+1).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Rank of every FᵏᵀFᵏ (defaults to n).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MuArg {
    /// μ = m + 1
    #[value(name = "m-plus-1")]
    MPlusOne,
    /// μ = min(m + 1, n)
    N,
    /// μ = min(m + 1, rank)
    Ranks,
}

#[derive(Args)]
struct CrossoverArgs {
    #[arg(long, value_enum, default_value_t = MuArg::MPlusOne)]
    mu: MuArg,
    #[arg(long, default_value_t = 400)]
    m_max: usize,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Dimension for `--mu n`.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Largest constraint rank for `--mu ranks`.
    #[arg(long, default_value_t = 1000)]
    rank: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON.
    #[arg(long = "in")]
    input: PathBuf,
    /// Oracle seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle multistart count.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct BenchArgs {
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma_max: f64,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutArg,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<EcqpInstance, CliError> {
    let j: InstanceJson = parse_json(path)?;
    Ok(EcqpInstance::from_json(&j).map_err(ecqp::Error::from)?)
}

fn emit(out: &OutArg, mut text: String) -> Result<(), CliError> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn gen(a: &GenArgs) -> Result<(), CliError> {
    let text = if a.asqp {
        if a.n < 2 {
            return Err(CliError::Usage("--asqp needs n ≥ 2".into()));
        }
        ecqp::json::to_string(&random_asqp(a.seed, a.n).to_json())
    } else {
        let spec = if a.ball {
            InstanceSpec::ball()
        } else {
            InstanceSpec {
                gamma_max: a.gamma_max,
                ..InstanceSpec::default()
            }
        };
        let inst = random_instance(a.seed, a.n, a.m, &spec).map_err(ecqp::Error::from)?;
        ecqp::json::to_string(&inst.to_json())
    };
    emit(&a.out, text)
}

fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&a.input)?;
    ecqp::model::validate(&inst).map_err(ecqp::Error::from)?;
    let opts = a.tol.options()?;
    let sol = solve_sdp(&build_relaxation(&homogenize(&inst)), &opts.solver);
    emit(&a.out, ecqp::json::to_string(&sol.to_json()))?;
    if sol.status != SolveStatus::Optimal {
        return Err(ecqp::Error::Solver {
            status: sol.status,
            gap: sol.gap,
        }
        .into());
    }
    Ok(())
}

fn round(a: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&a.input)?;
    let run = run_pipeline(&inst, &a.tol.options()?)?;
    emit(&a.out, ecqp::json::to_string(&run.rounding.certificate))
}

fn asqp(a: &AsqpArgs) -> Result<(), CliError> {
    let inst = match &a.input {
        Some(p) => {
            let j: AsqpJson = parse_json(p)?;
            AsqpInstance::from_json(&j).map_err(ecqp::Error::from)?
        }
        None if a.n >= 2 => random_asqp(a.seed, a.n),
        None => return Err(CliError::Usage("--n must be at least 2".into())),
    };
    let run = solve_asqp(&inst, &a.tol.options()?)?;
    let r = &run.result;
    emit(&a.out, ecqp::json::to_string(r))?;
    let feasible = r.row_sum_error <= 1e-8 && r.col_sum_error <= 1e-8 && r.min_entry >= -1e-8 && r.max_entry <= 1.0 + 1e-8;
    if !feasible {
        return Err(CliError::Check("rounded matrix is not doubly stochastic".into()));
    }
    if !r.guarantee_holds {
        return Err(CliError::Check(format!("f(x) = {} above guarantee {}", r.f_x, r.guarantee)));
    }
    Ok(())
}

fn bounds_table(a: &TableArgs) -> Result<(), CliError> {
    let rank = a.rank.unwrap_or(a.n);
    let rows = a
        .m
        .clone()
        .map(|m| bound_values(m, a.n, a.gamma, &vec![rank; m]))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ecqp::Error::from)?;
    let text = match a.format {
        Format::Csv => to_csv(&rows),
        Format::Json => ecqp::json::to_string(&rows),
    };
    emit(&a.out, text)
}

#[derive(Serialize)]
struct CrossoverSummary<'a> {
    mu: &'static str,
    gamma: f64,
    m_max: usize,
    crossover: Option<usize>,
    failures: &'a [usize],
}

fn crossover(a: &CrossoverArgs) -> Result<(), CliError> {
    let (rule, name) = match a.mu {
        MuArg::MPlusOne => (MuRule::MPlusOne, "m-plus-1"),
        MuArg::N => (MuRule::Dimension(a.n), "n"),
        MuArg::Ranks => (MuRule::MaxRank(a.rank), "ranks"),
    };
    let rep: CrossoverReport = crossover_sweep(a.m_max, a.gamma, rule).map_err(ecqp::Error::from)?;
    let text = match a.format {
        Format::Json => ecqp::json::to_string(&CrossoverSummary {
            mu: name,
            gamma: a.gamma,
            m_max: a.m_max,
            crossover: rep.crossover,
            failures: &rep.failures,
        }),
        Format::Csv => {
            let mut s = String::from("m,mu,r0,new,nv,new_beats_nv\n");
            for r in &rep.rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.m,
                    rule.mu(r.m),
                    r.r0,
                    r.new_ratio,
                    r.nv,
                    r.new_ratio > r.nv
                ));
            }
            s
        }
    };
    emit(&a.out, text)
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    if a.budget == 0 {
        return Err(CliError::Usage("--budget must be positive".into()));
    }
    let inst = load_instance(&a.input)?;
    let run = run_pipeline(&inst, &a.tol.options()?)?;
    let budget = Budget {
        starts: a.budget,
        ..Budget::default()
    };
    let oracle = best_feasible_search(&inst, a.seed, budget);
    let report = build_report(&inst, &run, Some(oracle), false, &CheckTolerances::default());
    emit(&a.out, ecqp::json::to_string(&report))?;
    if !report.pass {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(CliError::Check(failed.join(", ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    seed: u64,
    digest: String,
    /// `ok`, or the failure message.
    outcome: String,
    v_sdp: Option<f64>,
    f_x: Option<f64>,
    ratio: Option<f64>,
    iterations: Option<usize>,
    pass: bool,
    seconds: f64,
    times: Option<StageTimes>,
}

#[derive(Serialize)]
struct BenchSummary {
    n: usize,
    m: usize,
    gamma_max: f64,
    threads: usize,
    count: usize,
    passed: usize,
    total_seconds: f64,
    max_seconds: f64,
    mean_seconds: f64,
    runs: Vec<BenchRow>,
}

fn bench_one(seed: u64, a: &BenchArgs, opts: &PipelineOptions) -> BenchRow {
    let spec = InstanceSpec {
        gamma_max: a.gamma_max,
        ..InstanceSpec::default()
    };
    let start = Instant::now();
    let inst = match random_instance(seed, a.n, a.m, &spec) {
        Ok(i) => i,
        Err(e) => {
            return BenchRow {
                seed,
                digest: String::new(),
                outcome: e.to_string(),
                v_sdp: None,
                f_x: None,
                ratio: None,
                iterations: None,
                pass: false,
                seconds: start.elapsed().as_secs_f64(),
                times: None,
            }
        }
    };
    let result = run_pipeline(&inst, opts);
    let seconds = start.elapsed().as_secs_f64();
    let digest = instance_digest(&inst);
    match result {
        Ok(run) => {
            let rep = build_report(&inst, &run, None, true, &CheckTolerances::default());
            BenchRow {
                seed,
                digest,
                outcome: "ok".into(),
                v_sdp: Some(rep.v_sdp),
                f_x: Some(rep.certificate.f_x),
                ratio: Some(rep.certificate.ratio),
                iterations: Some(rep.iterations),
                pass: rep.pass,
                seconds,
                times: rep.times,
            }
        }
        Err(e) => BenchRow {
            seed,
            digest,
            outcome: e.to_string(),
            v_sdp: None,
            f_x: None,
            ratio: None,
            iterations: None,
            pass: false,
            seconds,
            times: None,
        },
    }
}

fn bench_threads() -> Result<usize, CliError> {
    match std::env::var("ECQP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Usage(format!("ECQP_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |k| k.get())),
    }
}

fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let opts = a.tol.options()?;
    let threads = bench_threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let start = Instant::now();
    // indexed parallel collect keeps seed order regardless of completion order
    let runs: Vec<BenchRow> = pool.install(|| {
        (a.seed..a.seed + a.count)
            .into_par_iter()
            .map(|s| bench_one(s, a, &opts))
            .collect()
    });
    let total_seconds = start.elapsed().as_secs_f64();
    let passed = runs.iter().filter(|r| r.pass).count();
    let max_seconds = runs.iter().map(|r| r.seconds).fold(0.0, f64::max);
    let mean_seconds = if runs.is_empty() {
        0.0
    } else {
        runs.iter().map(|r| r.seconds).sum::<f64>() / runs.len() as f64
    };
    let count = runs.len();
    emit(
        &a.out,
        ecqp::json::to_string(&BenchSummary {
            n: a.n,
            m: a.m,
            gamma_max: a.gamma_max,
            threads,
            count,
            passed,
            total_seconds,
            max_seconds,
            mean_seconds,
            runs,
        }),
    )?;
    if passed < count {
        return Err(CliError::Check(format!("{} of {count} runs failed", count - passed)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Round(a) => round(a),
        Command::Asqp(a) => asqp(a),
        Command::BoundsTable(a) => bounds_table(a),
        Command::Crossover(a) => crossover(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ecqp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
