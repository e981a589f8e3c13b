//! `schmlab`: certify Schmidt numbers of states and PEB levels of channels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod recipes;
mod report;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use schmlab::channels::{certify_peb, kraus_rank_profile, KrausRankProfile, PEBCertificate};
use schmlab::io::{self, StateRecord};
use schmlab::linalg;
use schmlab::par::{self, ExecMode};
use schmlab::schmidt::{certify, edge_decompose, witness_from_lambda, CertifyOptions, Effort, SchmidtCertificate, SearchOptions};
use schmlab::states::Tolerances;
use schmlab::{Error, RankTolerance};

use recipes::{ChannelKind, Recipe, RecipeArgs};
use report::{Report, Search};

const THREADS_VAR: &str = "SCHMLAB_THREADS";
const MAX_ITER_VAR: &str = "SCHMLAB_MAX_ITER";

#[derive(Debug, Parser)]
#[command(name = "schmlab", version, about = "Schmidt-number and PEB certification")]
struct Cli {
    /// Search budget preset.
    #[arg(long, global = true, value_enum, default_value_t = EffortArg::Default)]
    effort: EffortArg,
    /// Seed for every stochastic search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the relative rank cutoff and the PSD tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Run searches on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EffortArg {
    Quick,
    Default,
    Thorough,
}

impl From<EffortArg> for Effort {
    fn from(e: EffortArg) -> Self {
        match e {
            EffortArg::Quick => Effort::Quick,
            EffortArg::Default => Effort::Default,
            EffortArg::Thorough => Effort::Thorough,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Binary,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify the Schmidt number of a state file or a built state.
    AnalyzeState {
        /// State file (JSON or binary).
        path: Option<PathBuf>,
        /// Build the state instead of reading it.
        #[arg(long, value_enum, conflicts_with = "path")]
        recipe: Option<Recipe>,
        #[command(flatten)]
        params: RecipeArgs,
        /// Also run the edge decomposition of this order.
        #[arg(long)]
        edge: Option<usize>,
        /// Write the Λ-map witness of the lower bound here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Certify the PEB level of a channel file or a named channel.
    AnalyzeChannel {
        /// Channel file (JSON).
        path: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "path")]
        channel: Option<ChannelKind>,
        /// Dimension of a named channel.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Build a state and write it with its provenance.
    Build {
        #[arg(value_enum)]
        recipe: Recipe,
        #[command(flatten)]
        params: RecipeArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Certify a family of built states over a parameter range.
    Sweep(sweep::SweepArgs),
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Usage(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Context {
    effort: Effort,
    search: SearchOptions,
    json: Option<PathBuf>,
    started: Instant,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let effort = Effort::from(cli.effort);
        let mut search = SearchOptions::from_effort(effort, cli.seed);
        if cli.sequential {
            search = search.with_exec(ExecMode::Sequential);
        }
        if let Some(t) = cli.tol {
            search.tol.rank = RankTolerance::new(t)?;
            search.tol.psd = t;
        }
        Ok(Self { effort, search, json: cli.json.clone(), started: Instant::now() })
    }

    fn report<C: Serialize>(&self, command: &'static str, input: serde_json::Value, body: C) -> Report<C> {
        Report {
            tool: report::TOOL,
            version: report::VERSION,
            command,
            input,
            search: Search { effort: self.effort, trials: self.search.trials, seed: self.search.seed },
            tolerances: self.search.tol,
            body,
            timing_ms: self.started.elapsed().as_millis(),
        }
    }

    fn emit<C: Serialize>(&self, report: &Report<C>) -> CliResult<()> {
        report.write(self.json.as_deref()).map_err(|e| Failure::Io(self.json.clone().unwrap_or_default(), e))
    }

    fn tol(&self) -> &Tolerances {
        &self.search.tol
    }
}

/// Positive integer from the environment, if set.
fn env_count(var: &str) -> CliResult<Option<usize>> {
    let Ok(raw) = std::env::var(var) else { return Ok(None) };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(Some(n)),
        _ => Err(Failure::Usage(format!("{var} must be a positive integer, got `{raw}`"))),
    }
}

fn init_env() -> CliResult<()> {
    if let Some(n) = env_count(THREADS_VAR)? {
        par::init_threads(n);
    }
    if let Some(n) = env_count(MAX_ITER_VAR)? {
        linalg::set_iteration_cap(n)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("schmlab: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    init_env()?;
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::AnalyzeState { path, recipe, params, edge, witness } => {
            analyze_state(&ctx, path.as_deref(), *recipe, params, *edge, witness.as_deref())
        }
        Command::AnalyzeChannel { path, channel, dim } => analyze_channel(&ctx, path.as_deref(), *channel, *dim),
        Command::Build { recipe, params, out, format } => build(&ctx, *recipe, params, out.as_deref(), *format),
        Command::Sweep(args) => sweep::run(&ctx, args),
    }
}

#[derive(Serialize)]
struct EdgeSummary {
    k: usize,
    p: f64,
    steps: usize,
    peeled_members: usize,
    budget_exhausted: bool,
    reconstruction_error: f64,
}

#[derive(Serialize)]
struct StateBody {
    dims: [usize; 2],
    certificate: SchmidtCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<EdgeSummary>,
}

fn analyze_state(
    ctx: &Context,
    path: Option<&Path>,
    recipe: Option<Recipe>,
    params: &RecipeArgs,
    edge: Option<usize>,
    witness: Option<&Path>,
) -> CliResult<()> {
    let (omega, hint, input) = match (path, recipe) {
        (Some(p), _) => {
            let doc = io::read_state(p).map_err(|e| located(e, p))?;
            let input = json!({ "path": p.display().to_string(), "provenance": doc.provenance });
            (doc.state.density(), doc.hint, input)
        }
        (None, Some(r)) => {
            let b = recipes::build(r, params)?;
            let input = json!({ "recipe": r, "parameters": b.parameters, "seed": ctx.search.seed });
            (b.state, b.ensemble, input)
        }
        (None, None) => return Err(Failure::Usage("give a state file or --recipe".into())),
    };
    let mut opts = CertifyOptions::new(ctx.search);
    if let Some(h) = hint {
        opts = opts.with_hint(h);
    }
    let certificate = certify(&omega, &opts)?;

    if let Some(wpath) = witness {
        match &certificate.lower_evidence {
            Some(ev) => {
                let w = witness_from_lambda(&omega, ev)?;
                std::fs::write(wpath, io::witness_to_json(&w)?).map_err(|e| Failure::Io(wpath.to_path_buf(), e))?;
            }
            None => log::warn!("lower bound is 1: no Λ-map witness to write"),
        }
    }
    let edge = match edge {
        Some(k) => {
            let d = edge_decompose(&omega, k, &ctx.search)?;
            Some(EdgeSummary {
                k,
                p: d.p,
                steps: d.steps,
                peeled_members: d.peeled.len(),
                budget_exhausted: d.budget_exhausted,
                reconstruction_error: omega.trace_distance(&d.reconstruct())?,
            })
        }
        None => None,
    };

    let dims = omega.dims();
    println!("dims: {} x {}", dims.a, dims.b);
    println!("Schmidt number: {} <= SN <= {}{}", certificate.lower, certificate.upper, if certificate.is_tight() { " (tight)" } else { "" });
    println!("upper bound from {:?} ensemble of {} members", certificate.upper_method, certificate.upper_members.len());
    if let Some(d) = &certificate.diagnostic {
        println!("warning: {d}");
    }
    if let Some(e) = &edge {
        println!("edge decomposition (k = {}): p = {:.6}", e.k, e.p);
    }
    let report = ctx.report("analyze-state", input, StateBody { dims: [dims.a, dims.b], certificate, edge });
    ctx.emit(&report)
}

#[derive(Serialize)]
struct ChannelBody {
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    certificate: PEBCertificate,
    entanglement_breaking: bool,
    kraus_ranks: KrausRankProfile,
}

fn analyze_channel(ctx: &Context, path: Option<&Path>, kind: Option<ChannelKind>, dim: usize) -> CliResult<()> {
    let (channel, input) = match (path, kind) {
        (Some(p), _) => (io::read_channel(p).map_err(|e| located(e, p))?, json!({ "path": p.display().to_string() })),
        (None, Some(k)) => (recipes::build_channel(k, dim)?, json!({ "channel": k, "dim": dim })),
        (None, None) => return Err(Failure::Usage("give a channel file or --channel".into())),
    };
    let certificate = certify_peb(&channel, &ctx.search)?;
    let kraus_ranks = kraus_rank_profile(&channel, ctx.tol().rank)?;
    let eb = certificate.is_entanglement_breaking();
    println!("channel: {} -> {}, {} Kraus operators", channel.dim_in(), channel.dim_out(), channel.kraus().len());
    println!("k_peb: {} <= k <= {}", fmt_opt(certificate.k_peb_lower), fmt_opt(certificate.k_peb_upper));
    if eb {
        println!("entanglement breaking");
    }
    println!("canonical Kraus ranks: {:?}", kraus_ranks.canonical);
    let body = ChannelBody {
        dim_in: channel.dim_in(),
        dim_out: channel.dim_out(),
        kraus_count: channel.kraus().len(),
        certificate,
        entanglement_breaking: eb,
        kraus_ranks,
    };
    ctx.emit(&ctx.report("analyze-channel", input, body))
}

fn fmt_opt(v: Option<usize>) -> String {
    v.map_or_else(|| "?".into(), |k| k.to_string())
}

fn build(ctx: &Context, recipe: Recipe, params: &RecipeArgs, out: Option<&Path>, format: Format) -> CliResult<()> {
    let built = recipes::build(recipe, params)?;
    let record: StateRecord = built.record(recipe, ctx.search.seed);
    let bytes = match format {
        Format::Json => {
            let mut s = io::state_to_json(&record)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Binary => {
            let data = match &built.pure {
                Some(p) => io::StateData::Pure(p.clone()),
                None => io::StateData::Mixed(built.state.clone()),
            };
            io::encode_state_binary(&data)
        }
    };
    match out {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| Failure::Io(p.to_path_buf(), e))?;
            let provenance = record.provenance.as_ref().map(|v| v.to_string()).unwrap_or_default();
            println!("wrote {} ({})", p.display(), provenance);
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| Failure::Io("<stdout>".into(), e))?;
        }
    }
    Ok(())
}

/// Prefix errors about a file with its path.
fn located(e: Error, p: &Path) -> Failure {
    match e {
        Error::Parse(msg) => Failure::Core(Error::Parse(format!("{}: {msg}", p.display()))),
        Error::Io(io) => Failure::Io(p.to_path_buf(), io),
        other => Failure::Core(other),
    }
}
