//! Command-line front end for the `minplus` toolkit.
//!
//! Every subcommand writes its outputs into `--out-dir`, prints a JSON
//! [`RunReport`] to stdout and saves the same report as
//! `<subcommand>.report.json`. Node indices in reports are 1-based.

mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};
pub use io::InputFormat;
pub use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "minplus", version, about = "Min-plus shortest paths, regression and low-rank factorization")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory receiving all output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Format of `--input` files.
    #[arg(long, global = true, value_enum, default_value_t = InputFormat::Edgelist)]
    pub format: InputFormat,

    /// Treat edge lists as directed.
    #[arg(long, global = true)]
    pub directed: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shortest-path (Kleene star) matrix of a graph or matrix.
    Spd(SpdArgs),
    /// Min-plus regression `min_x ‖A ⊗ x − y‖`.
    Regress(RegressArgs),
    /// Low-rank min-plus factorization.
    Factor(FactorArgs),
    /// Classical low-rank baseline (truncated SVD or NNMF).
    Baseline(BaselineArgs),
    /// Relative residual against rank for one method.
    ResidualCurve(CurveArgs),
    /// Closest-neighbourhood assignment from a factor file.
    Assign(AssignArgs),
}

#[derive(Debug, Args)]
pub struct SpdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "distances.csv")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Norm {
    Inf,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Coefficient matrix as CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side as a one-row or one-column CSV.
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = Norm::Inf)]
    pub norm: Norm,
    /// Starting point for the 2-norm search: `auto` (the ∞-norm solution) or a CSV file.
    #[arg(long, default_value = "auto")]
    pub x0: String,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "regression.json")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FactorMode {
    Sym,
    General,
    Actual,
}

#[derive(Debug, Clone, Args)]
pub struct MinplusOptions {
    /// Jacobi sweeps per Newton step (symmetric mode).
    #[arg(long, default_value_t = 5)]
    pub t: usize,
    /// Initial step fraction (symmetric mode).
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    /// Random restarts; defaults to 100 (symmetric) or 10 (general).
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Update the left factor with the freshly updated right factor (general mode).
    #[arg(long)]
    pub gauss_seidel: bool,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    /// Graph (distances are computed) or, with `--format matrix-csv`, the matrix to factor.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, value_enum, default_value_t = FactorMode::Sym)]
    pub mode: FactorMode,
    #[command(flatten)]
    pub options: MinplusOptions,
    /// Maximum number of waypoint sets examined (actual mode).
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
    #[arg(long, default_value = "factors.json")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Svd,
    Nnmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Distance,
    Adjacency,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: BaselineMethod,
    #[arg(long)]
    pub rank: usize,
    /// NNMF iterations.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Matrix to approximate; defaults to distances for SVD and adjacency for NNMF.
    #[arg(long, value_enum)]
    pub target: Option<Target>,
    /// Prefix of the output CSV files.
    #[arg(long, default_value = "baseline")]
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveMethod {
    MinplusSym,
    MinplusGeneral,
    Svd,
    Nnmf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: CurveMethod,
    /// Largest rank of the sweep; defaults to the full rank.
    #[arg(long)]
    pub max_rank: Option<usize>,
    #[command(flatten)]
    pub options: MinplusOptions,
    /// NNMF iterations.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, value_enum)]
    pub target: Option<Target>,
    #[arg(long, default_value = "residual_curve.csv")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    /// `factors.json` from `factor`, or a factor matrix as CSV.
    #[arg(long)]
    pub factors: PathBuf,
    #[arg(long, default_value = "assignments.csv")]
    pub out: String,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spd(_) => "spd",
            Command::Regress(_) => "regress",
            Command::Factor(_) => "factor",
            Command::Baseline(_) => "baseline",
            Command::ResidualCurve(_) => "residual-curve",
            Command::Assign(_) => "assign",
        }
    }
}

/// Execute `cli`; `argv` is echoed into the report.
pub fn run(cli: &Cli, argv: &[String]) -> CliResult<RunReport> {
    let start = Instant::now();
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| CliError::data(&format!("cannot create {}", cli.out_dir.display()), e))?;
    let mut report = RunReport::new(argv, cli.command.name(), cli.seed);
    match &cli.command {
        Command::Spd(args) => commands::spd(cli, args, &mut report)?,
        Command::Regress(args) => commands::regress(cli, args, &mut report)?,
        Command::Factor(args) => commands::factor(cli, args, &mut report)?,
        Command::Baseline(args) => commands::baseline(cli, args, &mut report)?,
        Command::ResidualCurve(args) => commands::residual_curve(cli, args, &mut report)?,
        Command::Assign(args) => commands::assign(cli, args, &mut report)?,
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    let path = cli.out_dir.join(format!("{}.report.json", report.subcommand));
    report.outputs.push(path);
    report.save(&cli.out_dir)?;
    Ok(report)
}
