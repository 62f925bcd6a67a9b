//! `repmatch`: solve, verify, cross-check and sweep the reputation-matching
//! model from the command line.
//!
//! Exit codes: 0 on success, 1 when a check fails or a solver gives up,
//! 2 on usage, input or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "repmatch",
    version,
    about = "Optimal project selection under reputation learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the learning model or the no-learning benchmark.
    Solve(SolveArgs),
    /// Certify a learning report against the optimality conditions.
    Verify(VerifyArgs),
    /// Solve by grid value iteration, optionally comparing with a report.
    Oracle(OracleArgs),
    /// Simulate lifetime payoffs under a report's threshold policy.
    Simulate(SimulateArgs),
    /// Sweep one parameter and tabulate the boundaries.
    Sweep(SweepArgs),
    /// Compare learning and no-learning boundaries.
    Compare(CompareArgs),
    /// Search a parameter box for a U-shaped alpha(kappa).
    Witness(WitnessArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Learning,
    NoLearning,
    Both,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, value_enum, default_value = "learning")]
    model: ModelArg,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of evenly spaced rows in the value-function curve.
    #[arg(long, value_name = "N", requires = "curve_out")]
    emit_curve: Option<usize>,
    #[arg(long, requires = "emit_curve")]
    curve_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    report: PathBuf,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 4000)]
    n_grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    tie_tolerance: f64,
    /// Learning report to measure the grid solution against.
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of the grid arrays (pi, W, V_a, V_b).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    params: PathBuf,
    /// Learning report whose boundaries define the policy.
    #[arg(long)]
    policy: PathBuf,
    #[arg(long)]
    pi0: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_events: usize,
    /// Also run the dominance check with +/- shifts of these sizes.
    #[arg(long, value_delimiter = ',')]
    dominance: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV with one row per simulated path.
    #[arg(long)]
    paths_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    params: PathBuf,
    /// One of r, lambda_a, lambda_b, c, kappa, phi_a, phi_b.
    #[arg(long)]
    param: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "both")]
    model: ModelArg,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Classify the shape of this column (w1, beta, alpha, beta_hat, alpha_hat).
    #[arg(long)]
    shape: Option<String>,
    /// Where to write the shape verdict; stderr when omitted.
    #[arg(long, requires = "shape")]
    shape_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    /// JSON search box; the built-in box when omitted.
    #[arg(long = "box")]
    search_box: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("repmatch: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
