use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kirchhoff",
    version,
    about = "Radial ground states of the Kirchhoff equation and their asymptotics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one ground state and write its profile and report.
    GroundState(GroundStateArgs),
    /// Trace the mass curve over a log-spaced frequency grid.
    MassCurve(MassCurveArgs),
    /// Find normalized solutions with prescribed mass c^2.
    Normalized(NormalizedArgs),
    /// Run the built-in invariant suites.
    Validate(ValidateArgs),
    /// Asymptotic law table.
    Laws {
        #[command(subcommand)]
        action: LawsAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum LawsAction {
    /// Write the symbolic law table as JSON.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Quick,
    Full,
}

/// `lambda`-independent problem data.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub dim: u32,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output base path; extensions `.csv`/`.json` are appended.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Flat `key=value` file overriding numerical tolerances.
    #[arg(long)]
    pub controls: Option<PathBuf>,
    /// Worker threads for parallel solves (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GroundStateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub lambda: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub lambda_max: f64,
    /// Grid size (default: `curve_points` from the controls).
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MassCurveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NormalizedArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Mass parameter: solutions satisfy |u|_2^2 = c^2.
    #[arg(long)]
    pub c: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::Quick)]
    pub suite: Suite,
    #[command(flatten)]
    pub common: CommonArgs,
}
