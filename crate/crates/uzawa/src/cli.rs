//! Command-line front end: generate problems, solve them, check the
//! convergence guarantees, and tabulate parameter sweeps.
//!
//! Exit codes: `0` solved/passed, `1` usage, I/O, or hypothesis errors,
//! `2` iteration cap or stall, `3` line-search breakdown, `4` a
//! convergence guarantee failed its check.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::analysis::{self, TheoremReport};
use crate::error::{Error, Result};
use crate::market;
use crate::problem_gen::{gen_linear_vi, gen_oseen, OseenGenConfig, VIGenConfig};
use crate::rng::SplitMix64;
use crate::solvers::{
    solve_with_config, ConvergenceHistory, IterationRecord, SolveOutcome, SolverConfig,
    TerminationReason,
};
use crate::system::{SaddleSystem, SchurOperator};

/// Sub-stream tag for the seeded initial dual guess.
const Y0_STREAM: u64 = 0x5930;
/// Probe count for the spectral coercivity and rank checks.
const VERIFY_TRIALS: usize = 100;

#[derive(Parser)]
#[command(
    name = "uzawa",
    version,
    about = "Saddle-point system toolkit: generators, iterative solvers, and convergence checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem and write it as a Matrix Market bundle.
    Gen(GenArgs),
    /// Solve one system and write history.csv plus summary.json.
    Solve(SolveArgs),
    /// Solve one system and check the convergence guarantees on the run.
    Verify(VerifyArgs),
    /// Solve a list of generated problems and tabulate one CSV row each.
    Sweep(SweepArgs),
}

/// Problem sources. Generator specs are comma-separated key=value lists.
#[derive(Args, Clone)]
struct InputArgs {
    /// Bundle directory to load (A.mtx, B.mtx, optional C.mtx, f.mtx,
    /// h.mtx, manifest.json).
    #[arg(long, value_name = "PATH")]
    bundle: Vec<PathBuf>,

    /// Random coupled system: n=..[,m=..][,seed=..][,shift=..][,skew_scale=..]
    #[arg(long = "gen-vi", value_name = "SPEC")]
    gen_vi: Vec<String>,

    /// Staggered-grid flow system: nx=..,ny=..[,nu=..][,stab=..][,wind=constant|recirculating][,seed=..]
    #[arg(long = "gen-oseen", value_name = "SPEC")]
    gen_oseen: Vec<String>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Relative residual tolerance (2-norm of the stacked residual).
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    /// Tolerance on the change between consecutive residual ratios.
    #[arg(long, default_value_t = 1e-7)]
    stall: f64,

    /// Iteration cap.
    #[arg(long = "max-iter", default_value_t = 2000)]
    max_iter: usize,

    /// Fixed step length; selects the classical fixed-step iteration
    /// instead of the exact line search.
    #[arg(long)]
    alpha: Option<f64>,

    /// Seed for the initial dual guess (uniform entries in [0, 1)).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self, record_history: bool) -> SolverConfig {
        SolverConfig {
            rel_residual_tol: self.tol,
            ratio_stall_tol: self.stall,
            max_iterations: self.max_iter,
            fixed_alpha: self.alpha,
            record_history,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Directory to write the bundle into.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    /// Overwrite an existing bundle.
    #[arg(long, action = ArgAction::SetTrue)]
    force: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    solver: SolverArgs,

    /// Directory for history.csv, summary.json, and (at sizes where the
    /// dense cross-checks are affordable) theorem_report.json.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    solver: SolverArgs,

    /// Optional directory for the run artifacts and the check report.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    solver: SolverArgs,

    /// Directory for sweep.csv.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// One resolved problem: where it came from and how to name it.
struct Problem {
    name: String,
    params: serde_json::Value,
    system: SaddleSystem,
}

fn parse_kv(spec: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("expected key=value, found '{part}' in '{spec}'"))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("invalid value '{value}' for {key}")))
}

fn parse_vi_spec(spec: &str) -> Result<VIGenConfig> {
    let mut cfg = VIGenConfig::new(0);
    let mut have_n = false;
    for (k, v) in parse_kv(spec)? {
        match k.as_str() {
            "n" => {
                cfg.n = parse_num(&k, &v)?;
                have_n = true;
            }
            "m" => cfg.m = Some(parse_num(&k, &v)?),
            "seed" => cfg.seed = parse_num(&k, &v)?,
            "shift" => cfg.shift = Some(parse_num(&k, &v)?),
            "skew_scale" => cfg.skew_scale = parse_num(&k, &v)?,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown --gen-vi key '{other}' (expected n, m, seed, shift, skew_scale)"
                )))
            }
        }
    }
    if !have_n {
        return Err(Error::InvalidConfig(
            "--gen-vi requires n=<count>".to_string(),
        ));
    }
    Ok(cfg)
}

fn parse_oseen_spec(spec: &str) -> Result<OseenGenConfig> {
    let mut cfg = OseenGenConfig::new(0, 0);
    let (mut have_nx, mut have_ny) = (false, false);
    for (k, v) in parse_kv(spec)? {
        match k.as_str() {
            "nx" => {
                cfg.grid_nx = parse_num(&k, &v)?;
                have_nx = true;
            }
            "ny" => {
                cfg.grid_ny = parse_num(&k, &v)?;
                have_ny = true;
            }
            "nu" => cfg.viscosity = parse_num(&k, &v)?,
            "stab" => cfg.stabilization = parse_num(&k, &v)?,
            "wind" => cfg.wind = v.parse()?,
            "seed" => cfg.seed = parse_num(&k, &v)?,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown --gen-oseen key '{other}' (expected nx, ny, nu, stab, wind, seed)"
                )))
            }
        }
    }
    if !have_nx || !have_ny {
        return Err(Error::InvalidConfig(
            "--gen-oseen requires nx=<count>,ny=<count>".to_string(),
        ));
    }
    Ok(cfg)
}

fn vi_problem(cfg: &VIGenConfig) -> Result<Problem> {
    let system = gen_linear_vi(cfg)?;
    let name = format!("vi-n{}-m{}-seed{}", cfg.n, cfg.resolved_m(), cfg.seed);
    let params = serde_json::json!({
        "kind": "vi",
        "n": cfg.n,
        "m": cfg.resolved_m(),
        "seed": cfg.seed,
        "shift": cfg.shift,
        "skew_scale": cfg.skew_scale,
    });
    Ok(Problem {
        name,
        params,
        system,
    })
}

fn oseen_problem(cfg: &OseenGenConfig) -> Result<Problem> {
    let system = gen_oseen(cfg)?;
    let name = format!(
        "oseen-{}x{}-nu{}-stab{}-{}-seed{}",
        cfg.grid_nx, cfg.grid_ny, cfg.viscosity, cfg.stabilization, cfg.wind, cfg.seed
    );
    let params = serde_json::json!({
        "kind": "oseen",
        "nx": cfg.grid_nx,
        "ny": cfg.grid_ny,
        "viscosity": cfg.viscosity,
        "stabilization": cfg.stabilization,
        "wind": cfg.wind.as_str(),
        "seed": cfg.seed,
    });
    Ok(Problem {
        name,
        params,
        system,
    })
}

fn bundle_problem(dir: &Path) -> Result<Problem> {
    if !dir.exists() {
        return Err(Error::InvalidConfig(format!(
            "bundle not found: {}",
            dir.display()
        )));
    }
    let (system, manifest) = market::read_system(dir)?;
    Ok(Problem {
        name: manifest.name,
        params: manifest.params,
        system,
    })
}

/// Everything the input flags describe, in a deterministic order:
/// bundles, then random coupled systems, then flow systems.
fn resolve_inputs(input: &InputArgs) -> Result<Vec<Problem>> {
    let mut problems = Vec::new();
    for dir in &input.bundle {
        problems.push(bundle_problem(dir)?);
    }
    for spec in &input.gen_vi {
        problems.push(vi_problem(&parse_vi_spec(spec)?)?);
    }
    for spec in &input.gen_oseen {
        problems.push(oseen_problem(&parse_oseen_spec(spec)?)?);
    }
    Ok(problems)
}

fn resolve_single_input(input: &InputArgs) -> Result<Problem> {
    let sources = input.bundle.len() + input.gen_vi.len() + input.gen_oseen.len();
    if sources != 1 {
        return Err(Error::InvalidConfig(format!(
            "expected exactly one of --bundle, --gen-vi, --gen-oseen; found {sources}"
        )));
    }
    Ok(resolve_inputs(input)?.remove(0))
}

fn seeded_y0(m: usize, seed: u64) -> Vec<f64> {
    SplitMix64::stream(seed, Y0_STREAM).uniform_vec(m)
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

fn write_history_csv(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let mut out = String::from("k,residual_norm,residual_ratio,alpha,d_norm,Q\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k, r.residual_norm, r.residual_ratio, r.alpha, r.d_norm, r.q_value
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct RunSummary {
    n: usize,
    m: usize,
    iterations: usize,
    final_residual_inf: f64,
    wall_seconds: f64,
    termination_reason: TerminationReason,
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_run_artifacts(
    dir: &Path,
    sys: &SaddleSystem,
    history: &ConvergenceHistory,
    report: Option<&TheoremReport>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_history_csv(&dir.join("history.csv"), &history.records)?;
    let (n, m) = sys.dims();
    let final_record = history.final_record();
    let summary = RunSummary {
        n,
        m,
        iterations: history.iterations(),
        final_residual_inf: final_record.residual_inf,
        wall_seconds: history.wall_seconds,
        termination_reason: history.termination,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    if let Some(report) = report {
        write_json(&dir.join("theorem_report.json"), report)?;
    }
    Ok(())
}

fn termination_exit(t: TerminationReason) -> i32 {
    match t {
        TerminationReason::Converged => 0,
        TerminationReason::Stalled | TerminationReason::MaxIterations => 2,
        TerminationReason::Breakdown => 3,
    }
}

fn error_exit(e: &Error) -> i32 {
    match e {
        Error::Breakdown { .. } => 3,
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_gen(args: &GenArgs) -> Result<i32> {
    if !args.input.bundle.is_empty() {
        return Err(Error::InvalidConfig(
            "gen expects a generator spec, not --bundle".to_string(),
        ));
    }
    let problem = resolve_single_input(&args.input)?;
    market::write_system(
        &problem.system,
        &args.out,
        &problem.name,
        problem.params,
        args.force,
    )?;
    let (n, m) = problem.system.dims();
    println!(
        "wrote bundle {} ({}, n = {n}, m = {m})",
        args.out.display(),
        problem.name
    );
    Ok(0)
}

/// Runs the configured solver; records full iterates only when the dense
/// cross-checks are affordable (they need them) to keep big runs lean.
fn run_solver(sys: &SaddleSystem, solver: &SolverArgs) -> Result<(SolveOutcome, bool)> {
    let dense_ok = analysis::dense_eligible(sys);
    let cfg = solver.config(dense_ok);
    let op = SchurOperator::new(sys)?;
    let y0 = seeded_y0(sys.dims().1, solver.seed);
    let outcome = solve_with_config(&op, y0, &cfg)?;
    Ok((outcome, dense_ok))
}

fn print_run_line(name: &str, history: &ConvergenceHistory) {
    let last = history.final_record();
    println!(
        "{name}: {:?} after {} iterations, residual ratio {:.3e}, wall {:.3}s",
        history.termination,
        history.iterations(),
        last.residual_ratio,
        history.wall_seconds
    );
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let problem = resolve_single_input(&args.input)?;
    let (outcome, dense_ok) = run_solver(&problem.system, &args.solver)?;
    let report = if dense_ok {
        Some(analysis::verify_run(
            &problem.system,
            &outcome.history,
            VERIFY_TRIALS,
        )?)
    } else {
        None
    };
    write_run_artifacts(&args.out, &problem.system, &outcome.history, report.as_ref())?;
    print_run_line(&problem.name, &outcome.history);
    Ok(termination_exit(outcome.history.termination))
}

/// Renders the worst-margin rows of a failed check for the console.
fn print_violations(report: &TheoremReport) {
    if let Some(false) = report.theorem1_pass {
        let mut worst: Option<(&crate::analysis::TheoremRow, f64)> = None;
        for row in &report.rows {
            if let Some(q) = row.q_ratio {
                let excess = q - row.q_bound;
                if worst.map(|(_, e)| excess > e).unwrap_or(true) {
                    worst = Some((row, excess));
                }
            }
        }
        if let Some((row, excess)) = worst {
            eprintln!(
                "contraction bound violated at k = {}: ratio {:.17e} > bound {:.17e} (excess {:.3e})",
                row.k,
                row.q_ratio.unwrap_or(f64::NAN),
                row.q_bound,
                excess
            );
        }
    }
    if let Some(false) = report.theorem2_pass {
        let mut worst: Option<(&crate::analysis::TheoremRow, f64)> = None;
        for row in &report.rows {
            if let (Some(lhs), Some(rhs)) = (row.thm2_lhs, row.thm2_rhs) {
                let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                if worst.map(|(_, r)| ratio > r).unwrap_or(true) {
                    worst = Some((row, ratio));
                }
            }
        }
        if let Some((row, ratio)) = worst {
            eprintln!(
                "residual envelope violated at k = {}: {:.17e} > {:.17e} (ratio {:.3e})",
                row.k,
                row.thm2_lhs.unwrap_or(f64::NAN),
                row.thm2_rhs.unwrap_or(f64::NAN),
                ratio
            );
        }
    }
    if let Some(false) = report.identity_pass {
        eprintln!(
            "direction/residual identity violated: worst relative error {:.3e}",
            report.identity_worst_rel_err.unwrap_or(f64::NAN)
        );
    }
    if let Some(l) = &report.lemma1 {
        if !l.pass {
            eprintln!(
                "coercivity check failed: worst probe margin {:.17e} < 1",
                l.worst_margin
            );
        }
    }
    if let Some(l) = &report.lbb {
        if !l.pass {
            eprintln!(
                "coupling rank check failed: smallest eigenvalue estimate {:.3e}",
                l.c_estimate
            );
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let problem = resolve_single_input(&args.input)?;
    let (outcome, _) = run_solver(&problem.system, &args.solver)?;
    let report = analysis::verify_run(&problem.system, &outcome.history, VERIFY_TRIALS)?;
    if let Some(dir) = &args.out {
        write_run_artifacts(dir, &problem.system, &outcome.history, Some(&report))?;
    }
    print_run_line(&problem.name, &outcome.history);
    let b = report.bounds;
    println!(
        "bounds: lambda_m = {:.6e}, |A| = {:.6e}, gamma = {:.6e}, beta = {:.6e}, |S| = {:.6e}, c0 = {:.6e}",
        b.lambda_m, b.norm_a, b.gamma, b.beta, b.norm_s, b.c0
    );
    let section = |name: &str, pass: bool| {
        println!("{name}: {}", if pass { "pass" } else { "FAIL" });
    };
    section("contraction bound", report.theorem1_pass.unwrap_or(true));
    section("residual envelope", report.theorem2_pass.unwrap_or(true));
    section("direction identity", report.identity_pass.unwrap_or(true));
    section(
        "coercivity probes",
        report.lemma1.as_ref().map(|l| l.pass).unwrap_or(true),
    );
    section(
        "coupling rank",
        report.lbb.as_ref().map(|l| l.pass).unwrap_or(true),
    );
    if report.all_pass() {
        Ok(termination_exit(outcome.history.termination))
    } else {
        print_violations(&report);
        Ok(4)
    }
}

fn csv_safe(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    std::fs::create_dir_all(&args.out)?;
    let mut csv = String::from("n,m,cond_a,cond_kkt,residual_inf,iterations,cpu_seconds,status\n");

    // Resolve specs one at a time so a failing generator spec becomes a
    // row, not an aborted sweep.
    enum Source {
        Bundle(PathBuf),
        Vi(String),
        Oseen(String),
    }
    let mut sources = Vec::new();
    for b in &args.input.bundle {
        sources.push(Source::Bundle(b.clone()));
    }
    for s in &args.input.gen_vi {
        sources.push(Source::Vi(s.clone()));
    }
    for s in &args.input.gen_oseen {
        sources.push(Source::Oseen(s.clone()));
    }

    for source in &sources {
        let resolved = match source {
            Source::Bundle(dir) => bundle_problem(dir),
            Source::Vi(spec) => parse_vi_spec(spec).and_then(|cfg| vi_problem(&cfg)),
            Source::Oseen(spec) => parse_oseen_spec(spec).and_then(|cfg| oseen_problem(&cfg)),
        };
        let problem = match resolved {
            Ok(p) => p,
            Err(e) => {
                let _ = writeln!(csv, ",,,,,,,{}", csv_safe(&format!("error: {e}")));
                eprintln!("sweep: {e}");
                continue;
            }
        };
        let (n, m) = problem.system.dims();
        let cond_a = analysis::condition_estimate(problem.system.a());
        let kkt = problem.system.assemble_kkt();
        let cond_kkt = analysis::condition_estimate(&kkt);
        let cfg = args.solver.config(false);
        let op = match SchurOperator::new(&problem.system) {
            Ok(op) => op,
            Err(e) => {
                let _ = writeln!(
                    csv,
                    "{n},{m},{cond_a},{cond_kkt},,,,{}",
                    csv_safe(&format!("error: {e}"))
                );
                eprintln!("sweep {}: {e}", problem.name);
                continue;
            }
        };
        let y0 = seeded_y0(m, args.solver.seed);
        match solve_with_config(&op, y0, &cfg) {
            Ok(outcome) => {
                let last = outcome.history.final_record();
                let status = serde_json::to_value(outcome.history.termination)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_else(|| format!("{:?}", outcome.history.termination));
                let _ = writeln!(
                    csv,
                    "{n},{m},{cond_a},{cond_kkt},{},{},{},{status}",
                    last.residual_inf,
                    outcome.history.iterations(),
                    outcome.history.wall_seconds
                );
                print_run_line(&problem.name, &outcome.history);
            }
            Err(e) => {
                let status = match &e {
                    Error::Breakdown { .. } => "breakdown".to_string(),
                    other => format!("error: {other}"),
                };
                let _ = writeln!(csv, "{n},{m},{cond_a},{cond_kkt},,,,{}", csv_safe(&status));
                eprintln!("sweep {}: {e}", problem.name);
            }
        }
    }
    let path = args.out.join("sweep.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(0)
}

/// Parses arguments and runs the selected command, returning the process
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit(&e)
        }
    }
}
