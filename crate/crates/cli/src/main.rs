//! Command-line frontend for the modspace library.
//!
//! Subcommands:
//!   norm       — modulation norm of a sampled field, optionally per-box
//!   decompose  — frequency-uniform decomposition pieces and residual
//!   classify   — well-posedness verdict for an equation/space pair
//!   sweep      — verdict grid over (s, q), CSV
//!   evolve     — nonlinear Cauchy solver (Picard or exponential stepper)
//!   probe      — inflation / smoothing / product-estimate experiments
//!
//! Global flags: --seed, --threads, --out, --format {report|csv},
//! --config FILE (JSON object whose keys mirror flag names; explicit
//! flags win over config values, config values win over defaults).
//!
//! All diagnostics are single-line `error: ...` messages on stderr with a
//! nonzero exit status.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use modspace::Window;
use report::OutFormat;

pub type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "modspace", version, about = "Modulation-space numerics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// RNG seed recorded in the manifest and used by randomized probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// JSON config file mirroring flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Modulation norm of a field file.
    Norm(NormArgs),
    /// Frequency-uniform decomposition of a field file.
    Decompose(DecomposeArgs),
    /// Well-posedness verdict for one parameter point.
    Classify(ClassifyArgs),
    /// Verdict grid over a range of s and a list of q.
    Sweep(SweepArgs),
    /// Evolve a field under u_t + (-Delta)^(alpha/2) u = u^k.
    Evolve(EvolveArgs),
    /// Quantitative experiments.
    #[command(subcommand)]
    Probe(ProbeCmd),
}

#[derive(Args)]
struct NormArgs {
    /// Field file (JSON).
    field: Option<PathBuf>,
    /// Regularity index s.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Local integrability exponent p in [1, inf].
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    /// Summation exponent q in [1, inf].
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    /// Window kind: raised-cosine or sharp.
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    /// Truncation radius for the box sum (default: grid maximum).
    #[arg(long)]
    k_max: Option<i64>,
    /// Include the per-box table in the output.
    #[arg(long)]
    breakdown: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Field file (JSON).
    field: Option<PathBuf>,
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long)]
    k_max: Option<i64>,
    /// Directory to write one field file per box piece.
    #[arg(long)]
    pieces_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Equation: fractional-heat, schrodinger, klein-gordon, heat-iwabuchi.
    #[arg(long)]
    equation: Option<String>,
    /// Dissipation order alpha (fractional-heat only).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Nonlinearity power k >= 2.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    equation: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    s_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s_max: Option<f64>,
    /// Number of s samples (1 collapses the range to s_min).
    #[arg(long)]
    s_steps: Option<usize>,
    /// Comma-separated list of q values.
    #[arg(long, value_delimiter = ',', value_parser = parse_exponent)]
    q_list: Option<Vec<f64>>,
    /// Attach measured inflation exponents on a coarse subgrid of
    /// ill-posed rows (fractional-heat only).
    #[arg(long)]
    measure: bool,
    /// Probe every this-many s rows when --measure is set.
    #[arg(long)]
    measure_stride: Option<usize>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Initial-data field file (JSON).
    field: Option<PathBuf>,
    /// Semigroup: heat (with --alpha) or schrodinger.
    #[arg(long)]
    equation: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Nonlinearity power k >= 2.
    #[arg(long)]
    k: Option<u32>,
    /// Time horizon.
    #[arg(long)]
    t: Option<f64>,
    /// Solver: picard-global or etd-step.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    time_nodes: Option<usize>,
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Exponential stepper order (1 or 2).
    #[arg(long)]
    etd_order: Option<u8>,
    /// Zero-padding factor for dealiased powers.
    #[arg(long)]
    dealias: Option<f64>,
    /// Norm used for diagnostics: s index.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    /// Drop the nonlinear term and evolve by the free semigroup alone.
    #[arg(long)]
    linear: bool,
    /// Skip the Duhamel residual check (it costs one extra quadrature pass).
    #[arg(long)]
    skip_residual: bool,
    /// Write the final state as a field file.
    #[arg(long)]
    final_state: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Norm-inflation witness scaling in N.
    Inflation(InflationArgs),
    /// Free-evolution smoothing rate in t.
    Smoothing(SmoothingArgs),
    /// Product-estimate constant scaling in the band limit.
    Product(ProductArgs),
}

#[derive(Args)]
struct InflationArgs {
    /// Data family: 1 (paired boxes at +-N) or 2 (separated wide blocks).
    #[arg(long)]
    case: Option<u8>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<i64>>,
    /// Block separation multiplier (case 2).
    #[arg(long)]
    sep: Option<i64>,
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long)]
    tol_input: Option<f64>,
    #[arg(long)]
    tol_output: Option<f64>,
    #[arg(long)]
    tol_exponent: Option<f64>,
}

#[derive(Args)]
struct SmoothingArgs {
    /// Semigroup: heat (with --alpha) or schrodinger.
    #[arg(long)]
    equation: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Target regularity s1 (norm measured in M^{s1}).
    #[arg(long, allow_negative_numbers = true)]
    s1: Option<f64>,
    /// Source regularity s2 (data normalized in M^{s2}).
    #[arg(long, allow_negative_numbers = true)]
    s2: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long)]
    n_min: Option<i64>,
    #[arg(long)]
    n_max: Option<i64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ProductArgs {
    /// Estimate shape: factored or power.
    #[arg(long)]
    law: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    /// Factored law: summation exponent on the distinguished factor.
    #[arg(long, value_parser = parse_exponent)]
    q1: Option<f64>,
    /// Factored law: summation exponent on the remaining factors.
    #[arg(long, value_parser = parse_exponent)]
    q2: Option<f64>,
    /// Power law: regularity of the factor space.
    #[arg(long, allow_negative_numbers = true)]
    s1: Option<f64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda_list: Option<Vec<i64>>,
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_exponent(raw: &str) -> Result<f64, String> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| format!("expected a number or 'inf': {e}")),
    }
}

fn parse_window(raw: &str) -> Result<Window, String> {
    serde_json::from_value(serde_json::Value::String(raw.to_string()))
        .map_err(|_| format!("unknown window {raw:?} (expected raised-cosine or sharp)"))
}

/// Resolved global options plus the loaded config object. `format` stays
/// unresolved here because the default differs by command (sweep emits CSV,
/// everything else a report).
pub struct Ctx {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<OutFormat>,
    config: serde_json::Map<String, serde_json::Value>,
}

impl Ctx {
    fn build(cli: &Cli) -> CliResult<Self> {
        let config = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                let value: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| format!("config {}: {e}", path.display()))?;
                match value {
                    serde_json::Value::Object(map) => map,
                    _ => return Err(format!("config {} must be a JSON object", path.display()).into()),
                }
            }
            None => serde_json::Map::new(),
        };
        let mut ctx = Ctx { seed: 0, out: cli.out.clone(), format: cli.format, config };
        ctx.seed = ctx.resolve(cli.seed, "seed", 0u64)?;
        if ctx.format.is_none() {
            if let Some(raw) = ctx.config.get("format").cloned() {
                let name: String = serde_json::from_value(raw)
                    .map_err(|e| format!("config key \"format\": {e}"))?;
                ctx.format = Some(match name.as_str() {
                    "report" => OutFormat::Report,
                    "csv" => OutFormat::Csv,
                    other => {
                        return Err(format!("config key \"format\": unknown format {other:?}").into())
                    }
                });
            }
        }
        Ok(ctx)
    }

    /// Flag value if given, else config value under `key`, else `default`.
    pub fn resolve<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(raw) => serde_json::from_value(raw.clone())
                .map_err(|e| format!("config key {key:?}: {e}").into()),
            None => Ok(default),
        }
    }

    /// Same as [`Ctx::resolve`] but without a default; `None` when absent.
    pub fn resolve_opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if let Some(v) = flag {
            return Ok(Some(v));
        }
        match self.config.get(key) {
            Some(raw) => serde_json::from_value(raw.clone())
                .map(Some)
                .map_err(|e| format!("config key {key:?}: {e}").into()),
            None => Ok(None),
        }
    }

    /// Exponent-valued config entries additionally accept the string "inf".
    pub fn resolve_exponent(&self, flag: Option<f64>, key: &str, default: f64) -> CliResult<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(serde_json::Value::String(s)) => {
                parse_exponent(s).map_err(|e| format!("config key {key:?}: {e}").into())
            }
            Some(raw) => serde_json::from_value(raw.clone())
                .map_err(|e| format!("config key {key:?}: {e}").into()),
            None => Ok(default),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let ctx = Ctx::build(&cli)?;
    match &cli.command {
        Cmd::Norm(args) => commands::norm(&ctx, args),
        Cmd::Decompose(args) => commands::decompose(&ctx, args),
        Cmd::Classify(args) => commands::classify(&ctx, args),
        Cmd::Sweep(args) => commands::sweep(&ctx, args),
        Cmd::Evolve(args) => commands::evolve(&ctx, args),
        Cmd::Probe(ProbeCmd::Inflation(args)) => commands::probe_inflation(&ctx, args),
        Cmd::Probe(ProbeCmd::Smoothing(args)) => commands::probe_smoothing(&ctx, args),
        Cmd::Probe(ProbeCmd::Product(args)) => commands::probe_product(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
