//! Command-line driver: evaluate curve points, sweep grids to CSV and
//! SVG, fit oscillatory remainders, and cross-check curves with the
//! shooting oracle.
//!
//! Exit codes are a contract: 0 success, 1 usage or malformed input,
//! 2 quadrature failure, 3 admissibility violation, 4 partial sweep,
//! 5 fit outside tolerance, 6 verification failure.

mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bifurc::asymptotics::{analyze_residual, large_alpha_model, AsymptoticModel, EnvelopeFit};
use bifurc::model::ProblemSpec;
use bifurc::oracle::calibrated_shoot;
use bifurc::quadrature::QuadratureConfig;
use bifurc::timemap::{
    curve_from_csv, curve_to_csv, lambda_of_alpha, outcomes_to_csv, sweep_outcomes, CurvePoint,
    GridSpec, Spacing, SweepResult, TimemapError,
};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "bifurc",
    version,
    about = "Bifurcation curves of degenerate quasilinear two-point problems"
)]
struct Cli {
    /// Worker threads for sweeps (0 = automatic).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Flat `key = value` config file; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one curve point and print it as JSON.
    Eval(EvalArgs),
    /// Sweep a grid of peak values and write the curve as CSV.
    Sweep(SweepArgs),
    /// Fit the oscillatory remainder of a swept curve.
    Fit(FitArgs),
    /// Cross-check curve rows against the shooting oracle.
    Verify(VerifyArgs),
}

/// Problem selection shared by the subcommands.
#[derive(Args)]
struct ProblemArgs {
    /// Problem family: osc-diffusion, osc-reaction, osc-both, pure-power.
    #[arg(long)]
    family: Option<String>,
    /// Diffusion power index (osc-diffusion).
    #[arg(long)]
    n: Option<u32>,
    /// Diffusion power coefficient (osc-diffusion).
    #[arg(long)]
    p: Option<f64>,
    /// Diffusion exponent (osc-reaction, pure-power).
    #[arg(long)]
    k: Option<u32>,
    /// Reaction half-degree (osc-reaction, pure-power).
    #[arg(long)]
    m: Option<u32>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Peak value to evaluate at.
    #[arg(long)]
    alpha: Option<f64>,
    /// Relative quadrature tolerance (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Smallest peak value of the grid.
    #[arg(long)]
    start: Option<f64>,
    /// Largest peak value of the grid.
    #[arg(long)]
    stop: Option<f64>,
    /// Number of grid points (linear and log spacing).
    #[arg(long)]
    count: Option<usize>,
    /// Grid spacing: linear, log, or phase-locked.
    #[arg(long)]
    spacing: Option<String>,
    /// Relative quadrature tolerance (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Optional SVG chart path.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Input curve CSV.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Asymptotic statement to fit against: 1.1, 1.2i, or 1.3i.
    #[arg(long)]
    theorem: Option<String>,
    /// Optional JSON report path.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Input curve CSV.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Shooting acceptance tolerance (default 1e-6).
    #[arg(long)]
    tol: Option<f64>,
    /// Number of evenly chosen rows to check (default 8).
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {}", message);
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let rc = RunConfig::load(cli.config.as_deref())?;
    let threads = rc.merge(cli.threads, "threads")?.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| format!("cannot configure {} threads: {}", threads, e))?;
    }
    match cli.command {
        Command::Eval(args) => cmd_eval(args, &rc),
        Command::Sweep(args) => cmd_sweep(args, &rc),
        Command::Fit(args) => cmd_fit(args, &rc),
        Command::Verify(args) => cmd_verify(args, &rc),
    }
}

/// Build the problem from flags plus config, letting flags win.
fn build_spec(args: &ProblemArgs, rc: &RunConfig) -> Result<ProblemSpec, String> {
    let mut pairs: Vec<(&str, String)> = Vec::new();
    let family = args.family.clone().or_else(|| rc.get("family").map(str::to_string));
    if let Some(v) = family {
        pairs.push(("family", v));
    }
    if let Some(v) = rc.merge(args.n, "n")? {
        pairs.push(("n", v.to_string()));
    }
    if let Some(v) = rc.merge(args.p, "p")? {
        pairs.push(("p", format!("{:?}", v)));
    }
    if let Some(v) = rc.merge(args.k, "k")? {
        pairs.push(("k", v.to_string()));
    }
    if let Some(v) = rc.merge(args.m, "m")? {
        pairs.push(("m", v.to_string()));
    }
    ProblemSpec::from_key_values(pairs.iter().map(|(k, v)| (*k, v.as_str())))
        .map_err(|e| e.to_string())
}

/// Quadrature tuned to a requested relative tolerance.
fn quad_config(tol: Option<f64>) -> Result<QuadratureConfig, String> {
    match tol {
        None => Ok(QuadratureConfig::default()),
        Some(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(format!("tolerance must be a positive number, got {}", t));
            }
            Ok(QuadratureConfig { rel_tol: t, abs_tol: 1e-2 * t, ..QuadratureConfig::default() })
        }
    }
}

/// Exit code for a failed curve evaluation: admissibility violations
/// are 3, grid/format problems are usage errors, the rest are
/// quadrature failures.
fn curve_error_code(err: &TimemapError) -> u8 {
    match err {
        TimemapError::Inadmissible { .. } => 3,
        TimemapError::InvalidGrid { .. } | TimemapError::CsvFormat { .. } => 1,
        _ => 2,
    }
}

fn cmd_eval(args: EvalArgs, rc: &RunConfig) -> Result<u8, String> {
    let spec = build_spec(&args.problem, rc)?;
    let alpha: f64 = rc.require(args.alpha, "alpha")?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(format!("peak value must be a positive finite number, got {}", alpha));
    }
    let qcfg = quad_config(rc.merge(args.tol, "tol")?)?;
    match lambda_of_alpha(&spec, alpha, &qcfg) {
        Ok(point) => {
            println!("{}", serde_json::to_string(&point).expect("plain struct serializes"));
            Ok(0)
        }
        Err(err) => {
            eprintln!("error: {}", err);
            Ok(curve_error_code(&err))
        }
    }
}

fn cmd_sweep(args: SweepArgs, rc: &RunConfig) -> Result<u8, String> {
    let spec = build_spec(&args.problem, rc)?;
    let spacing_token: String = rc.require(args.spacing.clone(), "spacing")?;
    let spacing = Spacing::parse(&spacing_token)
        .ok_or_else(|| format!("unknown spacing `{}`", spacing_token))?;
    let grid = GridSpec {
        start: rc.require(args.start, "start")?,
        stop: rc.require(args.stop, "stop")?,
        count: rc.merge(args.count, "count")?.unwrap_or(0),
        spacing,
    };
    let out: PathBuf = rc.require(args.out.clone(), "out")?;
    let svg_path = match args.svg.clone() {
        Some(p) => Some(p),
        None => rc.get("svg").map(PathBuf::from),
    };
    let qcfg = quad_config(rc.merge(args.tol, "tol")?)?;
    let outcomes = match sweep_outcomes(&spec, &grid, &qcfg) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {}", err);
            return Ok(curve_error_code(&err));
        }
    };
    let converged: Vec<CurvePoint> =
        outcomes.iter().filter_map(|(_, r)| r.as_ref().ok().copied()).collect();
    let complete = converged.len() == outcomes.len();
    let csv = if complete { curve_to_csv(&converged) } else { outcomes_to_csv(&outcomes) };
    std::fs::write(&out, csv).map_err(|e| format!("cannot write {}: {}", out.display(), e))?;
    if let Some(path) = svg_path {
        let model = large_alpha_model(&spec);
        let title = format!("{} bifurcation curve", spec.family().name());
        let chart = svg::curve_chart(&converged, &model, &title);
        std::fs::write(&path, chart)
            .map_err(|e| format!("cannot write {}: {}", path.display(), e))?;
    }
    if !complete {
        let failed = outcomes.len() - converged.len();
        eprintln!("warning: {} of {} points failed; partial CSV written", failed, outcomes.len());
        return Ok(4);
    }
    Ok(0)
}

/// Theorem token → the problem whose model the fit is judged against.
fn theorem_spec(token: &str, args: &ProblemArgs, rc: &RunConfig) -> Result<ProblemSpec, String> {
    let spec = match token {
        "1.1" => ProblemSpec::osc_reaction(
            rc.merge(args.k, "k")?.unwrap_or(2),
            rc.merge(args.m, "m")?.unwrap_or(2),
        ),
        "1.2i" => ProblemSpec::osc_diffusion(
            rc.merge(args.n, "n")?.unwrap_or(1),
            rc.merge(args.p, "p")?.unwrap_or(1.0),
        ),
        "1.3i" => Ok(ProblemSpec::osc_both()),
        other => return Err(format!("unknown theorem `{}`; expected 1.1, 1.2i, or 1.3i", other)),
    };
    spec.map_err(|e| e.to_string())
}

/// Acceptance gates for a fitted envelope, per theorem.
fn fit_passes(token: &str, spec: &ProblemSpec, model: &AsymptoticModel, fit: &EnvelopeFit) -> bool {
    if token == "1.2i" && spec.p() == 1.0 {
        // No second term to measure: the remainder must simply decay
        // clearly faster than the oscillatory envelopes.
        return fit.decay_exp <= -0.8;
    }
    let amp_target = model.second_coeff.abs();
    (fit.decay_exp - model.second_exp).abs() <= 0.05
        && (fit.amplitude - amp_target).abs() <= 0.10 * amp_target
        && fit.phase_offset.abs() <= 0.1
        && fit.sign_changes >= 30
}

fn cmd_fit(args: FitArgs, rc: &RunConfig) -> Result<u8, String> {
    let input: PathBuf = rc.require(args.input.clone(), "in")?;
    let theorem: String = rc.require(args.theorem.clone(), "theorem")?;
    let text = std::fs::read_to_string(&input)
        .map_err(|e| format!("cannot read {}: {}", input.display(), e))?;
    let rows = match curve_from_csv(&text) {
        Ok(rows) => rows,
        Err(err) => {
            eprintln!("error: {}", err);
            return Ok(1);
        }
    };
    let spec = theorem_spec(&theorem, &args.problem, rc)?;
    let model = large_alpha_model(&spec);
    let points: Vec<CurvePoint> = rows
        .iter()
        .filter(|r| r.converged && r.point.lambda.is_finite())
        .map(|r| r.point)
        .collect();
    let sweep = SweepResult { spec, points };
    let fit = match analyze_residual(&sweep, &model) {
        Ok(fit) => fit,
        Err(err) => {
            eprintln!("error: {}", err);
            return Ok(5);
        }
    };
    let passed = fit_passes(&theorem, &spec, &model, &fit);
    println!("amplitude = {:.6e}", fit.amplitude);
    println!("decay_exp = {:+.4}", fit.decay_exp);
    println!("sign_changes = {}", fit.sign_changes);
    if passed && theorem == "1.2i" && spec.p() == 1.0 {
        println!("second term below detection, remainder exponent <= -0.8");
    }
    if let Some(path) = args.json.clone().or_else(|| rc.get("json").map(PathBuf::from)) {
        let report = serde_json::json!({
            "theorem": theorem,
            "amplitude": fit.amplitude,
            "decay_exp": fit.decay_exp,
            "phase_offset": fit.phase_offset,
            "sign_changes": fit.sign_changes,
            "rms_misfit": fit.rms_misfit,
            "passed": passed,
        });
        std::fs::write(&path, format!("{}\n", report))
            .map_err(|e| format!("cannot write {}: {}", path.display(), e))?;
    }
    Ok(if passed { 0 } else { 5 })
}

fn cmd_verify(args: VerifyArgs, rc: &RunConfig) -> Result<u8, String> {
    let spec = build_spec(&args.problem, rc)?;
    let input: PathBuf = rc.require(args.input.clone(), "in")?;
    let tol = rc.merge(args.tol, "tol")?.unwrap_or(1e-6);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(format!("tolerance must be a positive number, got {}", tol));
    }
    let samples = rc.merge(args.samples, "samples")?.unwrap_or(8);
    if samples == 0 {
        return Err("need at least one sample (`--samples 0` checks nothing)".into());
    }
    let text = std::fs::read_to_string(&input)
        .map_err(|e| format!("cannot read {}: {}", input.display(), e))?;
    let rows = match curve_from_csv(&text) {
        Ok(rows) => rows,
        Err(err) => {
            eprintln!("error: {}", err);
            return Ok(1);
        }
    };
    if rows.is_empty() {
        return Err("curve file has no rows".into());
    }
    // Evenly spread row indices, always including the first and last.
    let take = samples.min(rows.len());
    let mut indices: Vec<usize> = (0..take)
        .map(|i| {
            if take == 1 {
                0
            } else {
                (i as f64 * (rows.len() - 1) as f64 / (take - 1) as f64).round() as usize
            }
        })
        .collect();
    indices.dedup();
    let mut checked = 0u64;
    let mut passed = 0u64;
    let mut worst_residual = 0.0f64;
    for idx in indices {
        let row = &rows[idx];
        checked += 1;
        if !row.converged || !row.point.lambda.is_finite() || !row.point.alpha.is_finite() {
            worst_residual = f64::INFINITY;
            continue;
        }
        match calibrated_shoot(&spec, row.point.alpha, row.point.lambda, tol) {
            Ok(shot) => {
                let residual = shot.boundary_residual.abs();
                worst_residual = worst_residual.max(residual);
                if residual <= tol && shot.energy_drift <= 10.0 * tol {
                    passed += 1;
                }
            }
            Err(err) => {
                eprintln!("warning: row {}: {}", idx + 1, err);
                worst_residual = f64::INFINITY;
            }
        }
    }
    let summary = serde_json::json!({
        "checked": checked,
        "passed": passed,
        "worst_residual": worst_residual,
    });
    println!("{}", summary);
    Ok(if passed == checked { 0 } else { 6 })
}
