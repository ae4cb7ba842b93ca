//! `kicked-holonomy`: regenerate the spectrum, exceptional points, holonomy,
//! Riemann-sheet data and adiabatic sweeps of the kicked spin from the
//! command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 degenerate model (no
//! complex exceptional points), 4 numerical failure.

mod commands;
mod config;
mod output;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kicked_holonomy::adiabatic::Ramp;
use kicked_holonomy::model::Band;

use config::{FileConfig, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(kicked_holonomy::Error),
    /// A computed cross-check exceeded the requested tolerance.
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use kicked_holonomy::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Model(E::InvalidArgument(_) | E::InvalidPath(_)) => 2,
            CliError::Model(E::DegenerateModel { .. }) => 3,
            CliError::Model(_) | CliError::Check(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Check(m) => write!(f, "numerical check failed: {m}"),
        }
    }
}

impl From<kicked_holonomy::Error> for CliError {
    fn from(e: kicked_holonomy::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Config(format!("cannot write output: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "kicked-holonomy", version, about = "Exotic holonomy of the periodically kicked spin-1/2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate z±, γ± and Δ over λ ∈ [0, 2π] (CSV) and print α, β, λ±.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of λ points, endpoints included.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Compare the closed-form exceptional points with a numerical search (JSON).
    Eps {
        #[command(flatten)]
        common: Common,
    },
    /// Holonomy matrix and winding integral of the real loop traversed `loops` times (JSON).
    Holonomy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        loops: Option<u32>,
    },
    /// Sample the eigenvalue sheet on a polar grid and flag branch cuts (CSV).
    Riemann {
        #[command(flatten)]
        common: Common,
        /// Grid resolution (angles and radii).
        #[arg(long)]
        grid: Option<usize>,
        /// Sample models without complex exceptional points instead of failing.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// Stroboscopic evolution under a slow sweep of λ (CSV trace, JSON report).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of kicks T.
        #[arg(long)]
        kicks: Option<usize>,
        #[arg(long)]
        loops: Option<u32>,
        #[arg(long, value_enum)]
        ramp: Option<RampArg>,
        /// Initial band of the reference frame at λ = 0.
        #[arg(long, value_enum)]
        band: Option<BandArg>,
        /// Run models without complex exceptional points (no exchange expected).
        #[arg(long)]
        allow_degenerate: bool,
        /// Write the JSON report here instead of the summary stream.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Holonomy fidelity of sweeps with increasing kick counts (JSON).
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        loops: Option<u32>,
        /// Strictly ascending kick counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        kicks_list: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        ramp: Option<RampArg>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Output file for the primary artifact (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Samples per loop along the real axis.
    #[arg(long)]
    samples: Option<usize>,
    /// Tolerance for the reported cross-checks.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RampArg {
    Linear,
    SineSquared,
}

impl From<RampArg> for Ramp {
    fn from(r: RampArg) -> Self {
        match r {
            RampArg::Linear => Ramp::Linear,
            RampArg::SineSquared => Ramp::SineSquared,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BandArg {
    Plus,
    Minus,
}

impl From<BandArg> for Band {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Plus => Band::Plus,
            BandArg::Minus => Band::Minus,
        }
    }
}

impl Common {
    fn flags(&self) -> FileConfig {
        FileConfig {
            mu: self.mu,
            theta: self.theta,
            phi: self.phi,
            out: self.out.clone(),
            samples: self.samples,
            tol: self.tol,
            ..Default::default()
        }
    }
}

fn settings(common: &Common, extra: FileConfig) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = common.flags().overridden_by(extra);
    RunConfig::resolve(file.overridden_by(flags))
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common, points } => {
            commands::spectrum(&settings(&common, FileConfig { points, ..Default::default() })?)
        }
        Command::Eps { common } => commands::eps(&settings(&common, FileConfig::default())?),
        Command::Holonomy { common, loops } => {
            commands::holonomy_cmd(&settings(&common, FileConfig { loops, ..Default::default() })?)
        }
        Command::Riemann { common, grid, allow_degenerate } => commands::riemann(&settings(
            &common,
            FileConfig { grid, allow_degenerate: flag(allow_degenerate), ..Default::default() },
        )?),
        Command::Sweep { common, kicks, loops, ramp, band, allow_degenerate, report } => {
            commands::sweep(&settings(
                &common,
                FileConfig {
                    kicks,
                    loops,
                    ramp: ramp.map(Into::into),
                    band: band.map(Into::into),
                    allow_degenerate: flag(allow_degenerate),
                    report,
                    ..Default::default()
                },
            )?)
        }
        Command::Scan { common, loops, kicks_list, ramp } => commands::scan(&settings(
            &common,
            FileConfig { loops, kicks_list, ramp: ramp.map(Into::into), ..Default::default() },
        )?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
