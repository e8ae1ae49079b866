//! Batch front end for the `tubeint` experiments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("numerical failure: {0}")]
    Numerical(tubeint::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<tubeint::Error> for CliError {
    fn from(e: tubeint::Error) -> Self {
        use tubeint::Error as E;
        match e {
            E::PositivityViolation { .. }
            | E::PositivityViolationW { .. }
            | E::NonFinite { .. }
            | E::Escape { .. }
            | E::NonPositiveY(_) => CliError::Numerical(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

const EXAMPLES: &str = "\
Experiments:
  tubeint simulate-y --y0 1 --eps 0.1 --tau-max 500 --out y_1.csv
  tubeint simulate-y --y0 0.7 --eps 0.1 --tau-max 500 --out y_07.csv
  tubeint invariant-drift --mode perturbative --eps 0.05 --y0 0.8 --out drift_08.csv
  tubeint invariant-drift --mode exact --eps 0.05 --y0 1.1 --out exact.csv
  tubeint fourier --eps 0.1 --y0 1 --tau-max 300 --out fourier.csv
  tubeint ermakov --t-end 200 --out ermakov.csv
  tubeint tube --eps 0.05 --y0 1.1 --z0-grid 0.1,0.2,0.3 --t-end 50 --out tube.csv
  tubeint gplot --input y_1.csv --out y_1.gp

Flags override entries of the optional --config file (`key = value` per line,
keys named like the long flags).";

#[derive(Debug, Parser)]
#[command(name = "tubeint", version, about = "Tube-integrable oscillator experiments", after_help = EXAMPLES)]
pub struct Cli {
    /// `key = value` file with defaults for any flag of the subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate y''' + 4y' = F(tau) y^(-5/2) and compare with the series
    SimulateY(SimulateArgs),
    /// Track the quadratic invariant along a z trajectory
    InvariantDrift(DriftArgs),
    /// Windowed Fourier coefficients, secular slope and third harmonic
    Fourier(FourierArgs),
    /// Logistic-driven oscillator with its Ermakov-Pinney companion
    Ermakov(ErmakovArgs),
    /// Exact-invariant trajectories over a grid of initial conditions
    Tube(TubeArgs),
    /// Write a gnuplot script for a CSV produced by another subcommand
    Gplot(GplotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemFlags {
    /// Oscillator frequency [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Cosine forcing constant C1 [default: eps * omega^3]
    #[arg(long)]
    pub c1: Option<f64>,
    /// Sine forcing constant C2 [default: 0]
    #[arg(long)]
    pub c2: Option<f64>,
    /// Forcing strength [default: 0.1]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial y [default: 1]
    #[arg(long)]
    pub y0: Option<f64>,
    /// Initial y' [default: 0]
    #[arg(long)]
    pub yp0: Option<f64>,
    /// Initial y'' [default: 0]
    #[arg(long)]
    pub ypp0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StepFlags {
    /// RK4 step [default: 0.001]
    #[arg(long)]
    pub h: Option<f64>,
    /// Keep every n-th step [default: 100]
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Escape threshold for |z| [default: 1e6]
    #[arg(long)]
    pub escape_z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Output CSV path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script next to --out
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub step: StepFlags,
    /// Final rescaled time [default: 500]
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriftMode {
    /// Coupled integration with the exact invariant
    Exact,
    /// Series coefficients truncated at --order
    Perturbative,
}

impl std::str::FromStr for DriftMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DriftArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub step: StepFlags,
    /// [default: perturbative]
    #[arg(long, value_enum)]
    pub mode: Option<DriftMode>,
    /// Initial z [default: 0.2]
    #[arg(long)]
    pub z0: Option<f64>,
    /// Initial p [default: 0]
    #[arg(long)]
    pub p0: Option<f64>,
    /// Final time [default: 500]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Series truncation order, 1 to 3 [default: 3]
    #[arg(long)]
    pub order: Option<u8>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct FourierArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    /// Span to analyse; truncated to whole windows of length 2 pi [default: 300]
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Highest harmonic, at most 8 [default: 3]
    #[arg(long)]
    pub harmonics: Option<usize>,
    /// RK4 steps per window; sets h = 2 pi / n [default: 2000]
    #[arg(long)]
    pub points_per_window: Option<usize>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct ErmakovArgs {
    #[command(flatten)]
    pub step: StepFlags,
    /// Logistic seed in (0, 1) [default: 0.37]
    #[arg(long)]
    pub l0: Option<f64>,
    /// Knot spacing [default: 1]
    #[arg(long)]
    pub ts: Option<f64>,
    /// Base level of f [default: 1]
    #[arg(long)]
    pub f0: Option<f64>,
    /// Modulation depth of f [default: 0.3]
    #[arg(long)]
    pub df: Option<f64>,
    /// Initial z [default: 0.2]
    #[arg(long)]
    pub z0: Option<f64>,
    /// Initial p [default: 0]
    #[arg(long)]
    pub p0: Option<f64>,
    /// Initial w [default: f(0)^(-1/4)]
    #[arg(long)]
    pub w0: Option<f64>,
    /// Initial w' [default: 0]
    #[arg(long)]
    pub dw0: Option<f64>,
    /// Final time [default: 200]
    #[arg(long)]
    pub t_end: Option<f64>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct TubeArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub step: StepFlags,
    /// Comma-separated initial z values [default: 0.1,0.2,0.3]
    #[arg(long)]
    pub z0_grid: Option<String>,
    /// Comma-separated initial p values [default: 0]
    #[arg(long)]
    pub p0_grid: Option<String>,
    /// Final time [default: 50]
    #[arg(long)]
    pub t_end: Option<f64>,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct GplotArgs {
    /// CSV written by another subcommand
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Script path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let resolver = config::Resolver::from_path(cli.config.as_deref())?;
    commands::dispatch(cli.command, resolver)
}
