//! Command-line front end for `rareweak`.
//!
//! Exit status: 0 on success, 2 on usage errors, 3 on computation failures
//! (for example a mixture fit that does not converge).

pub mod commands;
pub mod input;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use output::{Format, OutputDocument};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Computation(_) => EXIT_COMPUTATION,
        }
    }
}

impl From<rareweak::Error> for CliError {
    fn from(e: rareweak::Error) -> Self {
        use rareweak::Error as E;
        match e {
            E::UndefinedPoint { .. } => CliError::Computation(e.to_string()),
            E::InvalidParameter { .. }
            | E::NoThreshold
            | E::InsufficientData { .. }
            | E::OutOfDomain(_) => CliError::Usage(e.to_string()),
        }
    }
}

/// A rendered document plus an optional failure to report after printing
/// it (the output is still useful when, say, a fit hit its iteration cap).
#[derive(Debug)]
pub struct Outcome {
    pub document: OutputDocument,
    pub failure: Option<CliError>,
}

impl From<OutputDocument> for Outcome {
    fn from(document: OutputDocument) -> Self {
        Self {
            document,
            failure: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rareweak", version, about = "Thresholds for rare and weak signal identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print numbers with all digits instead of 6 significant digits.
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population KS, HC, class-boundary and local-fdr thresholds.
    Thresholds(commands::ThresholdsArgs),
    /// Empirical HC threshold from p-values or z-scores.
    Hc(commands::HcArgs),
    /// Mixture fit, local fdr cutoffs and curves.
    Fdr(commands::FdrArgs),
    /// Detection, identification and recovery boundaries.
    Phase(commands::PhaseArgs),
    /// HC / CB threshold ratio at and above the identification boundary.
    Ratio(commands::RatioArgs),
    /// Monte-Carlo error study.
    Simulate(commands::SimulateArgs),
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Thresholds(a) => &a.output,
            Command::Hc(a) => &a.output,
            Command::Fdr(a) => &a.output,
            Command::Phase(a) => &a.output,
            Command::Ratio(a) => &a.output,
            Command::Simulate(a) => &a.output,
        }
    }
}

pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Thresholds(a) => commands::thresholds(a).map(Outcome::from),
        Command::Hc(a) => commands::hc(a).map(Outcome::from),
        Command::Fdr(a) => commands::fdr(a),
        Command::Phase(a) => commands::phase(a).map(Outcome::from),
        Command::Ratio(a) => commands::ratio(a).map(Outcome::from),
        Command::Simulate(a) => commands::simulate(a).map(Outcome::from),
    }
}
