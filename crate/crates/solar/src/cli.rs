//! Command-line front end.
//!
//! Exit codes: 0 success, 1 IO/parse/usage error, 2 invariance refusal,
//! 3 boundary solution (the report is still written), 4 verification
//! failure.

use crate::formats::{self, FitJson, GroupJson, PenaltyFile, ProxJson, TraceWriter};
use crate::json;
use crate::verify::{self, SuiteOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use solar_core::group::DEFAULT_CAP;
use solar_core::{
    build_penalty, fit, generate_group, solve_min_norm_observed, DualState, FitError, FitOptions,
    GeneratorFamily, Method, PenaltySpec, SolveOptions, SweepOrder,
};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVARIANCE: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "solar", version, about = "Solar-penalized estimation by the least-squares reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Fit an estimator and write a FitReport as JSON.
    Fit(FitArgs),
    /// Identify the reflection group of a penalty and write a GroupReport.
    AnalyzeGroup(GroupArgs),
    /// Compute the penalized least-squares fit U(x).
    Prox(ProxArgs),
    /// Run the property suite and write a test report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PenaltyArgs {
    /// Penalty kind (e.g. fused-chain), a JSON spec file, or inline JSON.
    #[arg(long)]
    pub penalty: String,
    /// Penalty level(s); overrides the spec. Comma-separated for sparse-fused.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    /// Edge list CSV (two 1-based columns); overrides the spec.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Dimension, when there is no data to infer it from.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Signal CSV, one value per line.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write the coordinate-descent trace as CSV (forces dual-cd).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Seed for the shuffled sweep order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sweep base vectors in an order shuffled once by the seed.
    #[arg(long)]
    pub shuffle: bool,
    /// Report base indices with ⟨rⱼ, T(x)⟩ = 0.
    #[arg(long)]
    pub change_points: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Signal CSV; only its length is used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Closure enumeration cap.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProxArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub shuffle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = verify::DEFAULT_SEEDS)]
    pub seeds: Vec<u64>,
    /// Add this amount to every coordinate of U(x) before checking.
    #[arg(long, allow_negative_numbers = true)]
    pub perturb: Option<f64>,
    /// Extra instance to check (requires --penalty).
    #[arg(long, requires = "penalty")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub penalty: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Fit,
    AnalyzeGroup,
    Prox,
    Verify,
}

/// Normalized configuration shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub data_path: Option<PathBuf>,
    pub penalty: Option<String>,
    pub edges_path: Option<PathBuf>,
    pub n: Option<usize>,
    pub family: String,
    pub lambda: Option<Vec<f64>>,
    pub method: String,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub seed: u64,
    pub shuffle: bool,
    pub change_points: bool,
    pub group_cap: usize,
    pub seeds: Vec<u64>,
    pub perturb: Option<f64>,
    pub format: ReportFormat,
}

impl RunConfig {
    fn blank(command: CommandKind) -> Self {
        RunConfig {
            command,
            data_path: None,
            penalty: None,
            edges_path: None,
            n: None,
            family: "gaussian".into(),
            lambda: None,
            method: "auto".into(),
            output: None,
            trace: None,
            seed: 0,
            shuffle: false,
            change_points: false,
            group_cap: DEFAULT_CAP,
            seeds: verify::DEFAULT_SEEDS.to_vec(),
            perturb: None,
            format: ReportFormat::Json,
        }
    }

    fn with_penalty(mut self, p: PenaltyArgs) -> Self {
        self.penalty = Some(p.penalty);
        self.lambda = p.lambda;
        self.edges_path = p.edges;
        self.n = p.n;
        self
    }
}

impl From<CliCommand> for RunConfig {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Fit(a) => RunConfig {
                data_path: Some(a.data),
                family: a.family,
                method: a.method,
                output: a.output,
                trace: a.trace,
                seed: a.seed,
                shuffle: a.shuffle,
                change_points: a.change_points,
                ..RunConfig::blank(CommandKind::Fit)
            }
            .with_penalty(a.penalty),
            CliCommand::AnalyzeGroup(a) => RunConfig {
                data_path: a.data,
                output: a.output,
                group_cap: a.cap,
                ..RunConfig::blank(CommandKind::AnalyzeGroup)
            }
            .with_penalty(a.penalty),
            CliCommand::Prox(a) => RunConfig {
                data_path: Some(a.data),
                method: a.method,
                output: a.output,
                trace: a.trace,
                seed: a.seed,
                shuffle: a.shuffle,
                ..RunConfig::blank(CommandKind::Prox)
            }
            .with_penalty(a.penalty),
            CliCommand::Verify(a) => RunConfig {
                data_path: a.data,
                penalty: a.penalty,
                lambda: a.lambda,
                edges_path: a.edges,
                output: a.output,
                seeds: a.seeds,
                perturb: a.perturb,
                format: a.format,
                ..RunConfig::blank(CommandKind::Verify)
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] formats::FormatError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invariance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format(_) | CliError::Usage(_) => EXIT_IO,
            CliError::Invariance(_) => EXIT_INVARIANCE,
        }
    }
}

/// What a command produced: the document to write and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub body: String,
    pub code: i32,
    /// Printed to stderr.
    pub note: Option<String>,
}

impl CmdOutput {
    fn ok(body: String) -> Self {
        CmdOutput { body, code: EXIT_OK, note: None }
    }
}

fn usage(msg: impl ToString) -> CliError {
    CliError::Usage(msg.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    json::to_string(v).map_err(usage)
}

fn load_penalty(cfg: &RunConfig, data_len: Option<usize>) -> Result<PenaltySpec, CliError> {
    let arg = cfg.penalty.as_deref().ok_or_else(|| usage("--penalty is required"))?;
    let trimmed = arg.trim_start();
    let file = if trimmed.starts_with('{') {
        formats::parse_penalty_json(trimmed).map_err(|m| usage(format!("inline penalty: {m}")))?
    } else if Path::new(arg).is_file() || arg.ends_with(".json") {
        formats::read_penalty(Path::new(arg))?
    } else {
        PenaltyFile { kind: arg.to_string(), n: None, lambda: None, edges: None, matrix: None }
    };
    let mut spec = file.to_spec(cfg.n.or(data_len)).map_err(usage)?;
    if let Some(l) = &cfg.lambda {
        spec.lambda = l.clone();
    }
    if let Some(p) = &cfg.edges_path {
        spec.edges = Some(formats::read_edges(p)?);
    }
    if let Some(len) = data_len {
        if spec.n != len {
            return Err(usage(format!("penalty has n = {} but the data has {len} values", spec.n)));
        }
    }
    Ok(spec)
}

fn load_data(cfg: &RunConfig) -> Result<Option<Vec<f64>>, CliError> {
    Ok(match &cfg.data_path {
        Some(p) => Some(formats::read_signal(p)?),
        None => None,
    })
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    let order = if cfg.shuffle { SweepOrder::CyclicShuffledOnce { seed: cfg.seed } } else { SweepOrder::Cyclic };
    SolveOptions { sweep_order: order, ..SolveOptions::default() }
}

fn resolve_method(cfg: &RunConfig) -> Result<Method, CliError> {
    let m: Method = cfg.method.parse().map_err(usage)?;
    if cfg.trace.is_some() {
        return match m {
            Method::Auto | Method::DualCd => Ok(Method::DualCd),
            other => Err(usage(format!("--trace needs the dual-cd method, not {other}"))),
        };
    }
    Ok(m)
}

fn write_trace(path: &Path, spec: &PenaltySpec, x: &[f64], opts: &SolveOptions) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Format(formats::FormatError::Io { path: path.display().to_string(), source: e });
    let base = build_penalty(spec).map_err(usage)?;
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = TraceWriter::new(std::io::BufWriter::new(file)).map_err(usage)?;
    let mut failed = None;
    let mut obs = |_: &DualState, recs: &[solar_core::TraceRecord]| {
        for r in recs {
            if failed.is_none() {
                if let Err(e) = w.write(r) {
                    failed = Some(e);
                }
            }
        }
    };
    solve_min_norm_observed(DualState::new(x, &base).map_err(usage)?, &base, opts, &mut obs).map_err(usage)?;
    if let Some(e) = failed {
        return Err(usage(e));
    }
    w.finish().map_err(io)?;
    Ok(())
}

/// Fits `family` with the configured penalty. Invariance refusals are
/// errors; a boundary solution still yields the report, with exit code 3.
pub fn cmd_fit(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let x = load_data(cfg)?.ok_or_else(|| usage("--data is required"))?;
    let spec = load_penalty(cfg, Some(x.len()))?;
    let family: GeneratorFamily = cfg.family.parse().map_err(usage)?;
    let method = resolve_method(cfg)?;
    let opts = FitOptions { method, solve: solve_options(cfg), change_points: cfg.change_points, group_cap: DEFAULT_CAP };
    let result = fit(family, &spec, &x, &opts);
    if let (Some(path), Ok(_) | Err(FitError::Boundary(_))) = (&cfg.trace, &result) {
        write_trace(path, &spec, &x, &opts.solve)?;
    }
    match result {
        Ok(report) => Ok(CmdOutput::ok(to_json(&FitJson::from(&report))?)),
        Err(FitError::Boundary(report)) => {
            let coords: Vec<usize> = report.boundary.iter().map(|i| i + 1).collect();
            Ok(CmdOutput {
                body: to_json(&FitJson::from(report.as_ref()))?,
                code: EXIT_BOUNDARY,
                note: Some(format!(
                    "U(x) lies on the boundary of the {family} mean domain at coordinates {coords:?}; T(x) is not attained"
                )),
            })
        }
        Err(err @ FitError::Invariance { .. }) => Err(CliError::Invariance(err.to_string())),
        Err(FitError::Core(err)) => Err(usage(err)),
    }
}

pub fn cmd_analyze_group(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let data_len = load_data(cfg)?.map(|x| x.len());
    let spec = load_penalty(cfg, data_len)?;
    let base = build_penalty(&spec).map_err(usage)?;
    let report = generate_group(&base, cfg.group_cap).map_err(usage)?;
    Ok(CmdOutput::ok(to_json(&GroupJson::from(&report))?))
}

/// `U(x)` via the Gaussian fit, whose reduction is the identity.
pub fn cmd_prox(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let x = load_data(cfg)?.ok_or_else(|| usage("--data is required"))?;
    let spec = load_penalty(cfg, Some(x.len()))?;
    let method = resolve_method(cfg)?;
    let opts = FitOptions { method, solve: solve_options(cfg), ..FitOptions::default() };
    let report = fit(GeneratorFamily::Gaussian, &spec, &x, &opts).map_err(usage)?;
    if let Some(path) = &cfg.trace {
        write_trace(path, &spec, &x, &opts.solve)?;
    }
    Ok(CmdOutput::ok(to_json(&ProxJson {
        penalty: spec.kind.as_str().into(),
        n: spec.n,
        lambda: spec.lambda.clone(),
        method: report.method.as_str().into(),
        u: report.u,
        sweeps: report.sweeps,
        converged: report.converged,
        kkt_residual: report.kkt_residual,
    })?))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let data = match load_data(cfg)? {
        Some(x) => Some((load_penalty(cfg, Some(x.len()))?, x)),
        None => None,
    };
    let opts = SuiteOptions {
        seeds: cfg.seeds.clone(),
        perturb: cfg.perturb,
        threads: verify::threads_from_env(),
        data,
    };
    let report = verify::lemma_suite(&opts);
    let body = match cfg.format {
        ReportFormat::Json => to_json(&report)?,
        ReportFormat::Csv => report.to_csv().map_err(usage)?,
    };
    Ok(CmdOutput {
        body,
        code: if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
        note: Some(report.table()),
    })
}

pub fn execute(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    match cfg.command {
        CommandKind::Fit => cmd_fit(cfg),
        CommandKind::AnalyzeGroup => cmd_analyze_group(cfg),
        CommandKind::Prox => cmd_prox(cfg),
        CommandKind::Verify => cmd_verify(cfg),
    }
}

fn emit(cfg: &RunConfig, out: &CmdOutput) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, &out.body)
            .map_err(|e| CliError::Format(formats::FormatError::Io { path: path.display().to_string(), source: e })),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.body.as_bytes()).and_then(|_| stdout.flush()).map_err(usage)
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is reserved here
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let cfg = RunConfig::from(cli.command);
    match execute(&cfg).and_then(|out| emit(&cfg, &out).map(|_| out)) {
        Ok(out) => {
            if let Some(note) = &out.note {
                eprint!("{note}");
                if !note.ends_with('\n') {
                    eprintln!();
                }
            }
            out.code
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
