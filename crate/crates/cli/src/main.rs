//! `ucet` command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ucet_core::backend::{BackendError, ProcessBackend};
use ucet_core::cp::{run_cp, trace_to_csv, CpError, CpParams};
use ucet_core::formulation::Formulation;
use ucet_core::harness::{
    bench_run, generate_instance, performance_profile, profile_to_csv, relax, report_to_csv, tightness_report,
    tiny_instance, BenchMode, BenchmarkReport, GeneratorSpec, ProfileInput, BENCHMARK_COUNTS,
};
use ucet_core::la::{LaError, LaParams};
use ucet_core::model::{load_instance, save_instance, validate_solution, Instance, ModelError};
use ucet_core::oracle::{enumerate_optimal, OracleError, DEFAULT_DISPATCH_TOL};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_BACKEND: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

/// Relative slack allowed between the CP objective and the oracle optimum.
const VERIFY_SLACK: f64 = 0.005;

#[derive(Parser)]
#[command(name = "ucet", version, about = "Center-point solver for unit commitment with carbon emission trading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the center-point algorithm on an instance.
    Solve(SolveArgs),
    /// Continuous relaxation value of one formulation.
    Relax(RelaxArgs),
    /// Relaxation values and differences of all four formulations.
    Tightness(InstanceArgs),
    /// Write a replicated or tiny random instance.
    Generate(GenerateArgs),
    /// Benchmark report over instance files or replication rows.
    Bench(BenchArgs),
    /// Performance profiles from benchmark reports.
    Profile(ProfileArgs),
    /// Cross-check CP against exhaustive enumeration on a tiny instance.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// External solver command template with `{input}`, `{output}`,
    /// `{timelimit}` and `{gap}` placeholders.
    #[arg(long)]
    solver_cmd: Option<String>,
    #[arg(long)]
    eps_lp: Option<f64>,
    #[arg(long)]
    eps_r: Option<f64>,
    #[arg(long)]
    eps_g: Option<f64>,
    #[arg(long)]
    eps_h: Option<f64>,
    /// Cost segments per unit, overriding the instance file.
    #[arg(long)]
    l_seg: Option<usize>,
    /// `schedule` or `fixed:<value>`.
    #[arg(long, default_value = "schedule")]
    mu: String,
    /// Seconds of wall time.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Integer ellipsoid center iterations.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RelaxArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "cp_la")]
    formulation: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenerateArgs {
    /// Replication table row, 1 to 22.
    #[arg(long, conflicts_with = "tiny")]
    row: Option<usize>,
    /// Tiny random instance as `N,T`.
    #[arg(long)]
    tiny: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Coefficient perturbation for replicated units (needs `--seed`).
    #[arg(long, default_value_t = 0.0)]
    perturbation: f64,
    /// Eight-type unit table replacing the bundled one.
    #[arg(long)]
    base_dataset: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; replication rows are used when none are given.
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
    /// Replication rows, e.g. `1-5` or `1,3,14`.
    #[arg(long, default_value = "1-5")]
    rows: String,
    #[arg(long, default_value = "cp")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProfileArgs {
    /// `label=path` of a benchmark JSON report; repeat per method.
    #[arg(long = "report")]
    reports: Vec<String>,
    /// A metric matrix as `ProfileInput` JSON instead of reports.
    #[arg(long, conflicts_with = "reports")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    out: OutFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DISPATCH_TOL)]
    dispatch_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn backend_failure(e: &BackendError) -> Failure {
    Failure {
        code: EXIT_BACKEND,
        message: e.to_string(),
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<LaError> for Failure {
    fn from(e: LaError) -> Self {
        let code = match &e {
            LaError::Infeasible(_) | LaError::NoInterior(_) => EXIT_INFEASIBLE,
            LaError::Params(_) | LaError::Model(_) => EXIT_USAGE,
            LaError::Backend(b) => return backend_failure(b),
            _ => EXIT_BACKEND,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CpError> for Failure {
    fn from(e: CpError) -> Self {
        match e {
            CpError::La(la) => la.into(),
            CpError::CenterInfeasible => Failure {
                code: EXIT_INFEASIBLE,
                message: e.to_string(),
            },
            CpError::Params(m) => Failure::usage(m),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::Infeasible { .. } => EXIT_INFEASIBLE,
            OracleError::BitCap { .. } | OracleError::Model(_) => EXIT_USAGE,
            OracleError::Lp(_) => EXIT_BACKEND,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn backend(common: &Common) -> ProcessBackend {
    match &common.solver_cmd {
        Some(cmd) => ProcessBackend::new(cmd.clone()),
        None => ProcessBackend::from_env(),
    }
}

fn la_params(common: &Common) -> LaParams {
    let mut p = LaParams::default();
    if let Some(v) = common.eps_lp {
        p.eps_lp = v;
    }
    p
}

fn parse_mu(s: &str) -> Result<Option<f64>, Failure> {
    if s == "schedule" {
        return Ok(None);
    }
    let v = s
        .strip_prefix("fixed:")
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| Failure::usage(format!("--mu expects 'schedule' or 'fixed:<value>', got '{s}'")))?;
    if !(v > 0.0 && v <= 1.0) {
        return Err(Failure::usage(format!("fixed mu must lie in (0, 1], got {v}")));
    }
    Ok(Some(v))
}

fn cp_params(common: &Common) -> Result<CpParams, Failure> {
    let mut p = CpParams::default();
    if let Some(v) = common.eps_r {
        p.eps_r = v;
    }
    if let Some(v) = common.eps_g {
        p.eps_g = v;
    }
    if let Some(v) = common.eps_h {
        p.eps_h = v;
    }
    if let Some(v) = common.time_limit {
        p.time_limit = v;
    }
    if let Some(v) = common.max_iters {
        p.max_milp_iters = v;
    }
    p.mu_fixed = parse_mu(&common.mu)?;
    Ok(p)
}

fn load(path: &Path, common: &Common) -> Result<Instance, Failure> {
    Ok(load_instance(path, common.l_seg)?)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn solve(args: &SolveArgs) -> Outcome {
    let inst = load(&args.instance, &args.common)?;
    let params = cp_params(&args.common)?;
    let res = run_cp(&inst, &backend(&args.common), &la_params(&args.common), &params)?;
    if let OutFormat::Csv = args.common.out {
        print!("{}", trace_to_csv(&res.trace));
        return if res.best.is_some() {
            Ok(())
        } else {
            Err(Failure {
                code: EXIT_INFEASIBLE,
                message: "no integer-feasible solution found".into(),
            })
        };
    }
    let feasibility = match &res.best {
        Some(b) => Some(validate_solution(&inst, &b.point, 1e-6)?),
        None => None,
    };
    print_json(&json!({
        "best_objective": res.best.as_ref().map(|b| b.objective),
        "termination": res.termination.to_string(),
        "iterations": res.trace.len(),
        "elapsed_s": res.elapsed_s,
        "la": {
            "cuts": res.la.omega_r.len(),
            "relaxation_value": res.la.relaxation_value,
            "exit": res.la.exit,
        },
        "incumbent_times": res.incumbent_times,
        "trace": res.trace,
        "feasibility": feasibility,
        "solution": res.best.as_ref().map(|b| &b.point),
    }));
    if res.best.is_none() {
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: "no integer-feasible solution found".into(),
        });
    }
    Ok(())
}

fn relax_cmd(args: &RelaxArgs) -> Outcome {
    let inst = load(&args.instance, &args.common)?;
    let f: Formulation = args.formulation.parse().map_err(Failure::usage)?;
    let v = relax(&inst, f, &backend(&args.common), &la_params(&args.common))?;
    match args.common.out {
        OutFormat::Json => print_json(&json!({ "formulation": f.label(), "value": v.value, "cuts": v.cuts, "seconds": v.seconds })),
        OutFormat::Csv => println!("formulation,value,cuts,seconds\n{},{},{},{}", f.label(), v.value, v.cuts, v.seconds),
    }
    Ok(())
}

fn tightness(args: &InstanceArgs) -> Outcome {
    let inst = load(&args.instance, &args.common)?;
    let report = tightness_report(&inst, &backend(&args.common), &la_params(&args.common));
    match args.common.out {
        OutFormat::Json => {
            let values: serde_json::Map<_, _> = report
                .values
                .iter()
                .map(|(f, v)| (f.label().to_string(), json!({ "value": v.value, "cuts": v.cuts, "seconds": v.seconds })))
                .collect();
            let diffs: serde_json::Map<_, _> =
                report.differences().into_iter().map(|(f, d)| (f.label().to_string(), json!(d))).collect();
            let errors: serde_json::Map<_, _> =
                report.errors.iter().map(|(f, e)| (f.label().to_string(), json!(e))).collect();
            print_json(&json!({ "values": values, "differences": diffs, "errors": errors }));
        }
        OutFormat::Csv => {
            println!("formulation,value,difference,cuts,seconds");
            for (f, v) in &report.values {
                let d = report.difference(*f).map_or("-".into(), |d| d.to_string());
                println!("{},{},{d},{},{}", f.label(), v.value, v.cuts, v.seconds);
            }
        }
    }
    if report.values.is_empty() {
        return Err(Failure {
            code: EXIT_BACKEND,
            message: "every relaxation failed".into(),
        });
    }
    Ok(())
}

fn parse_rows(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("cannot parse rows '{s}'"));
    let mut rows = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                rows.extend(a..=b);
            }
            None => rows.push(part.parse().map_err(|_| bad())?),
        }
    }
    if rows.is_empty() || rows.iter().any(|r| *r == 0 || *r > BENCHMARK_COUNTS.len()) {
        return Err(Failure::usage(format!("rows must lie in 1..={}", BENCHMARK_COUNTS.len())));
    }
    Ok(rows)
}

fn generate(args: &GenerateArgs) -> Outcome {
    let inst = match (&args.row, &args.tiny) {
        (Some(row), None) => {
            let mut spec = GeneratorSpec::table_row(*row)
                .ok_or_else(|| Failure::usage(format!("row must lie in 1..={}", BENCHMARK_COUNTS.len())))?;
            if let Some(path) = &args.base_dataset {
                spec = spec.with_base_dataset(path)?;
            }
            spec.seed = args.seed;
            spec.perturbation = args.perturbation;
            generate_instance(&spec)?
        }
        (None, Some(nt)) => {
            let (n, t) = nt
                .split_once(',')
                .and_then(|(n, t)| Some((n.trim().parse().ok()?, t.trim().parse().ok()?)))
                .ok_or_else(|| Failure::usage(format!("--tiny expects N,T, got '{nt}'")))?;
            tiny_instance(args.seed.unwrap_or(0), n, t)?
        }
        _ => return Err(Failure::usage("give exactly one of --row or --tiny")),
    };
    save_instance(&inst, &args.output)?;
    eprintln!("wrote {} units x {} periods to {}", inst.num_units(), inst.horizon(), args.output.display());
    Ok(())
}

fn bench(args: &BenchArgs) -> Outcome {
    let mode: BenchMode = args.mode.parse().map_err(Failure::usage)?;
    let mut instances = Vec::new();
    if args.instances.is_empty() {
        for row in parse_rows(&args.rows)? {
            let mut spec = GeneratorSpec::table_row(row).expect("row checked");
            spec.seed = args.seed;
            let mut inst = generate_instance(&spec)?;
            if let Some(l) = args.common.l_seg {
                inst = Instance::derive(inst.units, inst.system, inst.cet, l)?;
            }
            instances.push((format!("No.{row}"), inst));
        }
    } else {
        for path in &args.instances {
            let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
            instances.push((name, load(path, &args.common)?));
        }
    }
    let report = bench_run(
        &instances,
        &backend(&args.common),
        &la_params(&args.common),
        &cp_params(&args.common)?,
        mode,
        args.workers,
    );
    match args.common.out {
        OutFormat::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
        OutFormat::Csv => print!("{}", report_to_csv(&report)),
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Metric matrix of best objectives; instances without a result in every
/// report are dropped.
fn metric_from_reports(specs: &[String]) -> Result<ProfileInput, Failure> {
    let mut methods = Vec::new();
    let mut reports = Vec::new();
    for spec in specs {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--report expects label=path, got '{spec}'")))?;
        let r: BenchmarkReport = serde_json::from_str(&read_text(Path::new(path))?)
            .map_err(|e| Failure::usage(format!("{path}: {e}")))?;
        methods.push(label.to_string());
        reports.push(r);
    }
    let first = reports.first().ok_or_else(|| Failure::usage("no reports given"))?;
    let mut problems = Vec::new();
    let mut metric = Vec::new();
    for inst in &first.instances {
        let row: Option<Vec<f64>> = reports
            .iter()
            .map(|r| r.instances.iter().find(|i| i.name == inst.name).and_then(|i| i.best_objective))
            .collect();
        match row {
            Some(row) => {
                problems.push(inst.name.clone());
                metric.push(row);
            }
            None => log::warn!("{}: missing in some report, left out of the profile", inst.name),
        }
    }
    Ok(ProfileInput { methods, problems, metric })
}

fn profile(args: &ProfileArgs) -> Outcome {
    let input = match &args.input {
        Some(path) => serde_json::from_str(&read_text(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => metric_from_reports(&args.reports)?,
    };
    let prof = performance_profile(&input).map_err(|e| Failure::usage(e.to_string()))?;
    match args.out {
        OutFormat::Json => println!("{}", serde_json::to_string_pretty(&prof).expect("profile serializes")),
        OutFormat::Csv => print!("{}", profile_to_csv(&prof)),
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Outcome {
    let inst = load(&args.instance, &args.common)?;
    let oracle = enumerate_optimal(&inst, args.dispatch_tol)?;
    let res = run_cp(&inst, &backend(&args.common), &la_params(&args.common), &cp_params(&args.common)?)?;
    let cp = res.best.as_ref().map(|b| b.objective);
    let pass = cp.is_some_and(|v| v <= oracle.optimum * (1.0 + VERIFY_SLACK));
    print_json(&json!({
        "oracle_optimum": oracle.optimum,
        "oracle_candidates": oracle.candidates,
        "cp_objective": cp,
        "ratio": cp.map(|v| v / oracle.optimum),
        "termination": res.termination.to_string(),
        "iterations": res.trace.len(),
        "elapsed_s": res.elapsed_s,
        "pass": pass,
    }));
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_MISMATCH,
            message: "CP objective exceeds the oracle optimum by more than 0.5%".into(),
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Relax(a) => relax_cmd(a),
        Command::Tightness(a) => tightness(a),
        Command::Generate(a) => generate(a),
        Command::Bench(a) => bench(a),
        Command::Profile(a) => profile(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
