//! Command-line experiment runner for `conewave`.
//!
//! Each subcommand reads a JSON configuration (optional), applies
//! `--section.key value` overrides, validates everything, runs one
//! experiment and writes its CSV (and optionally SVG) artifacts atomically
//! into `output.directory`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Experiment;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "conewave", version, about = "Spectral experiments for semilinear waves with half-line spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum of (x + i0)^λ
    Pseudofn(RunArgs),
    /// Fourier product or power of pseudofunction spectra, checked against the closed form
    Product(RunArgs),
    /// Numerical probe of a Sobolev multiplier bound under cutoff doubling
    NormProbe(RunArgs),
    /// Exact regularity thresholds
    Bounds(RunArgs),
    /// Picard iteration for the semilinear wave equation
    Solve(RunArgs),
    /// Fixed-point and residual check of the stationary solution
    StationaryCheck(RunArgs),
    /// Boosted stationary solution: parameters and Cauchy data
    Boost(RunArgs),
    /// Local regularity scan and singular support at one time
    Singsupp(RunArgs),
    /// Track the singular point of a boosted solution across times
    RayTrack(RunArgs),
    /// Residual of the radial stationary solution in n dimensions
    RadialNd(RunArgs),
    /// Render a CSV artifact as SVG
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exponent λ of the subcommand's pseudofunction
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Grid as CUTOFF:BINS
    #[arg(long, value_name = "CUTOFF:BINS")]
    pub grid: Option<String>,
    /// Nonlinearity power of the subcommand
    #[arg(long)]
    pub p: Option<u32>,
    /// Dotted overrides, e.g. `--solver.tol 1e-8 --output.directory runs/a`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// spectrum, spacetime-heat, exponent-profile or ray
    #[arg(long)]
    pub kind: String,
    /// CSV artifact to render
    #[arg(long)]
    pub input: PathBuf,
    /// Output path (defaults to the input with an .svg extension)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Command {
    fn experiment(&self) -> Option<(Experiment, &RunArgs)> {
        let e = match self {
            Command::Pseudofn(a) => (Experiment::Pseudofn, a),
            Command::Product(a) => (Experiment::Product, a),
            Command::NormProbe(a) => (Experiment::NormProbe, a),
            Command::Bounds(a) => (Experiment::Bounds, a),
            Command::Solve(a) => (Experiment::Solve, a),
            Command::StationaryCheck(a) => (Experiment::StationaryCheck, a),
            Command::Boost(a) => (Experiment::Boost, a),
            Command::Singsupp(a) => (Experiment::Singsupp, a),
            Command::RayTrack(a) => (Experiment::RayTrack, a),
            Command::RadialNd(a) => (Experiment::RadialNd, a),
            Command::Plot(_) => return None,
        };
        Some(e)
    }
}

/// Turns the trailing tokens and the alias flags into dotted key/value
/// pairs, in command-line order of precedence (later wins).
pub fn collect_overrides(exp: Experiment, args: &RunArgs) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut aliases: Vec<(String, String)> = Vec::new();
    if let Some(l) = args.lambda {
        aliases.push(("lambda".into(), l.to_string()));
    }
    if let Some(g) = &args.grid {
        aliases.push(("grid".into(), g.clone()));
    }
    if let Some(p) = args.p {
        aliases.push(("p".into(), p.to_string()));
    }
    let mut pairs = aliases;
    let mut tokens = args.overrides.iter();
    while let Some(tok) = tokens.next() {
        let Some(key) = tok.strip_prefix("--") else {
            return Err(CliError::Validation(format!("unexpected argument `{tok}` (overrides look like --section.key value)")));
        };
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => match tokens.next() {
                Some(v) => (key.to_string(), v.clone()),
                None => return Err(CliError::Validation(format!("--{key} needs a value"))),
            },
        };
        pairs.push((key, value));
    }
    for (key, value) in pairs {
        match key.as_str() {
            "lambda" => match exp.lambda_key() {
                Some(k) => out.push((k.to_string(), value)),
                None => {
                    return Err(CliError::Validation(format!(
                        "--lambda is not a parameter of {} (λ follows from p there)",
                        exp.name()
                    )))
                }
            },
            "p" => match exp.p_key() {
                Some(k) => out.push((k.to_string(), value)),
                None => return Err(CliError::Validation(format!("--p is not a parameter of {}", exp.name()))),
            },
            "grid" => {
                let (c, n) = value
                    .split_once(':')
                    .ok_or_else(|| CliError::Validation(format!("--grid expects CUTOFF:BINS, got `{value}`")))?;
                out.push(("grid.cutoff".into(), c.to_string()));
                out.push(("grid.bins".into(), n.to_string()));
            }
            _ => out.push((key, value)),
        }
    }
    Ok(out)
}

/// Sizes the global rayon pool from `CONEWAVE_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CONEWAVE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("CONEWAVE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("CONEWAVE_THREADS: {e}")))
}

/// Runs one invocation and returns the written files.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Command::Plot(p) = &cli.command {
        return plot_command(p);
    }
    let (exp, args) = cli.command.experiment().expect("experiment subcommand");
    let overrides = collect_overrides(exp, args)?;
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let cfg = config::load(text.as_deref(), &overrides)?;
    let outcome = commands::run(exp, &cfg)?;
    for m in &outcome.messages {
        println!("{m}");
    }
    output::emit(std::path::Path::new(&cfg.output.directory), &outcome.artifacts)
}

fn plot_command(p: &PlotArgs) -> Result<Vec<PathBuf>, CliError> {
    let kind = plot::PlotKind::parse(&p.kind)?;
    let bytes = std::fs::read(&p.input).map_err(|e| CliError::Io(format!("{}: {e}", p.input.display())))?;
    let hash = config::hex(&<sha2::Sha256 as sha2::Digest>::digest(&bytes));
    let svg = plot::render(&bytes, kind, &hash)?;
    let out = p.output.clone().unwrap_or_else(|| p.input.with_extension("svg"));
    output::write_atomic(&out, svg.as_bytes())?;
    println!("wrote {} ({} plot)", out.display(), kind.as_str());
    Ok(vec![out])
}
