//! Command-line front end: condition suites, equivalence harness, propagation
//! and lemma checks, with JSON/CSV output and exit codes
//! 0 = pass, 1 = fail, 2 = invalid input, 3 = breakdown or inconclusive.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use evolveq::catalog::default_dim;
use evolveq::lemma::{self, named_path, reconstruct_and_verify, DEFAULT_RESOLUTION};
use evolveq::propagator::{
    solve_ivp_with, verify_evolution_axioms, Method, Propagator, DEFAULT_SUBSTEPS,
};
use evolveq::regularity::{
    check_c1, check_kato53, check_yosida, equivalence_for, equivalence_matrix, Agreement,
    CheckConfig, ConditionReport, Verdict,
};
use evolveq::{builtin, load_family, Error, Grid, OperatorFamily, SCHEMA_VERSION};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "evolveq",
    version,
    about = "Regularity checks and propagators for operator families A(t) on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one condition suite (or all three) on a family.
    Check(CheckArgs),
    /// Run all three suites and compare their verdicts.
    Equivalence(EquivalenceArgs),
    /// Solve x' = A(t)x from (s, y) and verify the evolution-system axioms.
    Propagate(PropagateArgs),
    /// Mean-value and reconstruction checks on a named test path.
    Lemma(LemmaArgs),
    /// Re-run the command recorded in a manifest file.
    Replay { manifest: PathBuf },
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Built-in catalog family.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    family: Option<String>,
    /// Family specification (JSON).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Dimension for built-in families.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Absolute tolerance (relative to the family scale).
    #[arg(long)]
    tol: Option<f64>,
    /// Number of seeded random probe vectors.
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SuiteArg {
    Kato53,
    Yosida,
    C1,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Expect {
    Pass,
    Fail,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Frozen,
    Rk4,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 0 when the verdict matches instead of when it passes.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Args, Debug)]
struct EquivalenceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PropagateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Initial time; must be a grid point.
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    /// Initial vector as comma-separated values (default: all ones).
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Number of grid points (uniform).
    #[arg(long, default_value_t = 17)]
    grid_n: usize,
    /// Method for the propagator table checked against the axioms.
    #[arg(long, value_enum, default_value = "rk4")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SUBSTEPS)]
    substeps: usize,
    /// Trajectory CSV; the axiom report goes next to it as `.axioms.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// square, linear, constant, kink or family:<name>:<probe-index>.
    #[arg(long)]
    path: String,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Largest ladder rung (default resolution/8).
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = CheckConfig::default().seed)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
enum FamilySource {
    Builtin { name: String, dim: usize },
    File { path: String },
    Path { name: String },
}

/// Everything needed to reproduce a run; the timestamp is informational.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    schema_version: String,
    command: String,
    args: Vec<String>,
    source: FamilySource,
    config: Option<CheckConfig>,
    out: Option<String>,
    seed: u64,
    tool_version: String,
    timestamp: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Breakdown { .. } | Error::DerivativeUnavailable { .. } => EXIT_NUMERIC,
            Error::Domain { .. }
            | Error::Input(_)
            | Error::Shape(_)
            | Error::Parse(_)
            | Error::Io(_) => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&args);
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli.command, &args[1..]) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(value) = std::env::var("EVOLVEQ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            input_error(format!(
                "EVOLVEQ_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| input_error(e.to_string()))
}

fn run(command: Command, args: &[String]) -> CmdResult {
    match command {
        Command::Check(a) => cmd_check(a, args),
        Command::Equivalence(a) => cmd_equivalence(a, args),
        Command::Propagate(a) => cmd_propagate(a, args),
        Command::Lemma(a) => cmd_lemma(a, args),
        Command::Replay { manifest } => cmd_replay(&manifest),
    }
}

fn cmd_replay(path: &Path) -> CmdResult {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let mut argv = vec!["evolveq".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| input_error(e.to_string()))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(input_error("a manifest cannot replay another manifest"));
    }
    run(cli.command, &manifest.args)
}

fn resolve_family(
    args: &FamilyArgs,
) -> std::result::Result<(String, OperatorFamily, FamilySource), Failure> {
    let source = source_of(args)?;
    match &source {
        FamilySource::Builtin { name, dim } => {
            let entry = builtin(name, *dim)?;
            Ok((name.clone(), entry.family, source))
        }
        FamilySource::File { path } => {
            let family = load_family(path)?;
            for w in family.warnings() {
                eprintln!("warning: {w}");
            }
            Ok((path.clone(), family, source))
        }
        FamilySource::Path { .. } => unreachable!("families never come from lemma paths"),
    }
}

fn build_config(args: &ConfigArgs) -> std::result::Result<CheckConfig, Failure> {
    let mut cfg = CheckConfig::default();
    if let Some(n) = args.grid_n {
        cfg.grid_n = n;
    }
    if let Some(k) = args.k_max {
        cfg = cfg.with_k_max(k);
    }
    if let Some(t) = args.tol {
        cfg.tol_abs = t;
    }
    if let Some(p) = args.probes {
        cfg.random_probes = p;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(format!(".{suffix}"));
    out.with_file_name(name)
}

fn write_file(path: &Path, body: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, body)
        .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

/// Writes `body` to `out` with its manifest alongside, or prints it.
fn emit(
    out: Option<&Path>,
    body: &str,
    command: &str,
    args: &[String],
    source: FamilySource,
    config: Option<CheckConfig>,
    seed: u64,
) -> std::result::Result<(), Failure> {
    let Some(out) = out else {
        println!("{body}");
        return Ok(());
    };
    write_file(out, &format!("{body}\n"))?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION.to_string(),
        command: command.to_string(),
        args: args.to_vec(),
        source,
        config,
        out: Some(out.display().to_string()),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&manifest_path(out), &format!("{text}\n"))
}

fn verdict_code(verdict: Verdict, expect: Option<Expect>) -> u8 {
    match (verdict, expect) {
        (Verdict::Inconclusive, _) => EXIT_NUMERIC,
        (Verdict::Pass, None | Some(Expect::Pass)) | (Verdict::Fail, Some(Expect::Fail)) => {
            EXIT_PASS
        }
        _ => EXIT_FAIL,
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    schema_version: &'a str,
    family: &'a str,
    suite: SuiteArg,
    verdict: Verdict,
    reports: &'a [ConditionReport],
}

fn cmd_check(a: CheckArgs, args: &[String]) -> CmdResult {
    let cfg = build_config(&a.config)?;
    let (name, family, source) = resolve_family(&a.family)?;
    let mut reports = Vec::new();
    if matches!(a.suite, SuiteArg::Kato53 | SuiteArg::All) {
        reports.push(check_kato53(&family, &cfg)?);
    }
    if matches!(a.suite, SuiteArg::Yosida | SuiteArg::All) {
        reports.push(check_yosida(&family, &cfg)?);
    }
    if matches!(a.suite, SuiteArg::C1 | SuiteArg::All) {
        reports.push(check_c1(&family, &cfg)?);
    }
    let verdict = reports
        .iter()
        .map(|r| r.verdict)
        .reduce(Verdict::and)
        .expect("at least one suite");
    for r in &reports {
        eprintln!("{}: {:?}", r.suite.name(), r.verdict);
        for p in &r.parts {
            if p.verdict != Verdict::Pass {
                eprintln!("  part ({}): {:?}: {}", p.part, p.verdict, p.detail);
            }
        }
        if !r.failure_loci.is_empty() {
            eprintln!("  failure loci: {:?}", r.failure_loci);
        }
    }
    let body = serde_json::to_string_pretty(&CheckOutput {
        schema_version: SCHEMA_VERSION,
        family: &name,
        suite: a.suite,
        verdict,
        reports: &reports,
    })
    .expect("report serializes");
    let seed = cfg.seed;
    emit(
        a.out.as_deref(),
        &body,
        "check",
        args,
        source,
        Some(cfg),
        seed,
    )?;
    Ok(verdict_code(verdict, a.expect))
}

fn cmd_equivalence(a: EquivalenceArgs, args: &[String]) -> CmdResult {
    let cfg = build_config(&a.config)?;
    let report = match (&a.family.family, &a.family.file) {
        (Some(name), None) => {
            let dim = a.family.dim.unwrap_or_else(|| default_dim(name));
            equivalence_matrix(&builtin(name, dim)?, &cfg)?
        }
        _ => {
            let (name, family, _) = resolve_family(&a.family)?;
            equivalence_for(&name, &family, None, &cfg)?
        }
    };
    let source = source_of(&a.family)?;
    eprintln!(
        "{}: kato53 {:?}, yosida {:?}, c1 {:?} -> {:?}",
        report.family, report.verdicts[0], report.verdicts[1], report.verdicts[2], report.agreement
    );
    for m in &report.mismatches {
        eprintln!("  {m}");
    }
    let code = match report.agreement {
        Agreement::Inconclusive => EXIT_NUMERIC,
        Agreement::Disagree => EXIT_FAIL,
        Agreement::Agree if report.matches_truth == Some(false) => EXIT_FAIL,
        Agreement::Agree => EXIT_PASS,
    };
    let seed = cfg.seed;
    emit(
        a.out.as_deref(),
        &report.to_json(),
        "equivalence",
        args,
        source,
        Some(cfg),
        seed,
    )?;
    Ok(code)
}

fn source_of(args: &FamilyArgs) -> std::result::Result<FamilySource, Failure> {
    match (&args.family, &args.file) {
        (Some(name), None) => Ok(FamilySource::Builtin {
            name: name.clone(),
            dim: args.dim.unwrap_or_else(|| default_dim(name)),
        }),
        (None, Some(path)) => Ok(FamilySource::File {
            path: path.display().to_string(),
        }),
        _ => Err(input_error("give exactly one of --family or --file")),
    }
}

fn parse_vector(text: &str) -> std::result::Result<DVector<f64>, Failure> {
    let values: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| input_error(format!("--y `{text}`: {e}")))?;
    if values.is_empty() {
        return Err(input_error("--y is empty"));
    }
    Ok(DVector::from_vec(values))
}

fn cmd_propagate(a: PropagateArgs, args: &[String]) -> CmdResult {
    let y = a.y.as_deref().map(parse_vector).transpose()?;
    let mut family_args = a.family.clone();
    if family_args.family.is_some() && family_args.dim.is_none() {
        family_args.dim = y.as_ref().map(|y| y.len());
    }
    let (_, family, source) = resolve_family(&family_args)?;
    let y = y.unwrap_or_else(|| DVector::from_element(family.dim(), 1.0));
    if y.len() != family.dim() {
        return Err(input_error(format!(
            "--y has {} entries but the family has dimension {}",
            y.len(),
            family.dim()
        )));
    }
    if a.grid_n < 2 {
        return Err(input_error("--grid-n must be at least 2"));
    }
    let grid = Grid::uniform(a.grid_n - 1)?;
    let method = match a.method {
        MethodArg::Frozen => Method::FrozenProduct { n_sub: a.substeps },
        MethodArg::Rk4 => Method::ReferenceRk4 { n_sub: a.substeps },
    };
    let trajectory = solve_ivp_with(&family, a.s, &y, &grid, a.substeps)?;
    let table = Propagator::build(&family, &grid, method)?;
    let axioms = verify_evolution_axioms(&table)?;
    let solution_ok = trajectory.max_residual() <= trajectory.tol_res;
    eprintln!(
        "identity {} cocycle {:e} (tol {:e}) contraction {} residual {:e} (tol {:e}) trajectory residual {:e} (tol {:e})",
        axioms.identity_ok,
        axioms.cocycle_residual,
        axioms.tol_cocycle,
        axioms.contraction_excess.map_or("n/a".to_string(), |e| format!("{e:e}")),
        axioms.solution_residual,
        axioms.tol_res,
        trajectory.max_residual(),
        trajectory.tol_res
    );
    let csv = trajectory.to_csv();
    match a.out.as_deref() {
        None => print!("{csv}"),
        Some(out) => {
            write_file(
                &sibling(out, "axioms.json"),
                &format!("{}\n", axioms.to_json()),
            )?;
            emit(
                Some(out),
                csv.trim_end(),
                "propagate",
                args,
                source,
                None,
                0,
            )?;
        }
    }
    Ok(if axioms.passed() && solution_ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn cmd_lemma(a: LemmaArgs, args: &[String]) -> CmdResult {
    let path = named_path(&a.path, a.resolution, a.dim, a.seed)?;
    let k_max = a.k_max.unwrap_or(a.resolution / 8);
    let ladder = evolveq::regularity::geometric_ladder(8.min(k_max), k_max);
    let report = match a.tol {
        None => reconstruct_and_verify(&path, &ladder)?,
        Some(tol) => lemma::reconstruct_with(
            &path,
            &ladder,
            &lemma::LemmaConfig {
                tol_abs: tol,
                ..Default::default()
            },
        )?,
    };
    eprintln!(
        "{}: {:?}, mve margin at 0 {:e}, h constancy {:e} (tol {:e})",
        a.path, report.verdict, report.mve_margin_at_zero, report.h_constancy, report.tol_quad
    );
    let source = FamilySource::Path {
        name: a.path.clone(),
    };
    emit(
        a.out.as_deref(),
        &report.to_json(),
        "lemma",
        args,
        source,
        None,
        a.seed,
    )?;
    Ok(verdict_code(report.verdict, a.expect))
}
