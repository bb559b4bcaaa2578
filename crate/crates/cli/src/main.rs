//! `qtradeoff`: bounds, measurements, trade-off surfaces and seeded
//! tomography simulations for three-parameter qubit estimation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qtradeoff::{Error, Normalization};

#[derive(Parser, Debug)]
#[command(
    name = "qtradeoff",
    version,
    about = "Precision trade-offs for qubit tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// QCRB, Holevo and Nagaoka-Hayashi bounds at one state.
    Bounds(Common),
    /// Construct a measurement and its Fisher information.
    Povm(Common),
    /// Halfspace scan of the trade-off surface over a weight grid.
    Surface(Common),
    /// Monte Carlo tomography with a chosen measurement and estimator.
    Simulate(Common),
    /// Regenerate the weight-grid and state-sweep experiments.
    Reproduce(Common),
}

/// Comma-separated triple `a,b,c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triple(pub [f64; 3]);

fn parse_triple(s: &str) -> Result<Triple, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0f64; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("'{p}' is not finite"));
        }
    }
    Ok(Triple(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PovmArg {
    /// Optimal single-copy measurement for the weights.
    Opt1,
    /// Optimal two-copy measurement for the weights.
    Opt2,
    /// Two-copy SIC-POVM.
    Sic,
    /// Tabulated optimum at theta = (0.3, 0.3, 0.3), W = diag(1, 4, 9)/14.
    Supp6,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Linear,
    Mle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum NormalizationArg {
    #[value(alias = "per-measurement")]
    PerMeasurement,
    #[value(alias = "per-qubit")]
    PerQubit,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::PerMeasurement => Normalization::PerMeasurement,
            NormalizationArg::PerQubit => Normalization::PerQubit,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Bloch vector `x,y,z`.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub theta: Option<Triple>,
    /// Number of copies measured jointly.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub copies: Option<u8>,
    /// Weight triple `wx,wy,wz`.
    #[arg(long, value_parser = parse_triple, conflicts_with = "grid")]
    pub weights: Option<Triple>,
    /// Weight grid `u_i in {1..n}`, `W = diag(u^2)/|u|^2`, proportional triples removed.
    #[arg(long)]
    pub grid: Option<u32>,
    /// Measurements per estimate.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Estimates per experiment.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    #[arg(long, value_enum)]
    pub povm: Option<PovmArg>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    /// Output file (a directory for `reproduce`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bounds(c) => commands::bounds(c),
        Command::Povm(c) => commands::povm(c),
        Command::Surface(c) => commands::surface(c),
        Command::Simulate(c) => commands::simulate(c),
        Command::Reproduce(c) => commands::reproduce(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_solver_failure() {
        3
    } else {
        2
    }
}
