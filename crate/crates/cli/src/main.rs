//! `charflow`: trace characteristic and seed curves, build characteristic
//! charts, minimize the curvature functional, evaluate flux identities and
//! run verification suites.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Compute(charflow::Error),
    #[error("verification failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Compute(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<charflow::Error> for CliError {
    fn from(e: charflow::Error) -> Self {
        use charflow::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::UnknownEntry(_)
            | E::InvalidPolygon(_)
            | E::Mode(_)
            | E::SingularPoint { .. }
            | E::Domain { .. }
            | E::TooShort { .. }
            | E::NegativeHeight { .. } => CliError::Usage(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "charflow", version, about = "Characteristic curves and charts of prescribed p-mean curvature fields")]
struct Cli {
    /// Flat key = value file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report format [default: json]
    #[arg(long, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

/// Field selection shared by every computing command.
#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Catalog name (e.g. `radial`, `bilinear(y^3)`) or path to a field file.
    #[arg(long)]
    pub field: Option<String>,
    /// Chart, funnel and suite center as `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<commands::PointArg>,
    /// Chart half-width; also sizes the probes of custom fields.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace a characteristic or seed curve and write it as CSV.
    Trace(commands::TraceArgs),
    /// Build a characteristic chart and write it as JSON.
    Chart(commands::ChartArgs),
    /// Minimize the curvature functional over graphs with fixed ends.
    Minimize(commands::MinimizeArgs),
    /// Evaluate the flux identities over a polygon.
    Flux(commands::FluxArgs),
    /// Run a verification suite; exits with 1 if any check fails.
    Verify(commands::VerifyArgs),
    /// Inspect the built-in fields.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// One entry per line with its validity domain.
    List,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CHARFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("CHARFLOW_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => config::Config::load(p)?,
        None => config::Config::default(),
    };
    let format = cfg.or(cli.format, "format", Format::Json)?;
    match cli.command {
        Command::Trace(a) => commands::trace(&cfg, a),
        Command::Chart(a) => commands::chart(&cfg, format, a),
        Command::Minimize(a) => commands::minimize(&cfg, format, a),
        Command::Flux(a) => commands::flux(&cfg, format, a),
        Command::Verify(a) => commands::verify(&cfg, format, a),
        Command::Catalog { action: CatalogAction::List } => commands::catalog_list(format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("charflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
