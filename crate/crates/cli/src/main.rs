//! `pareto-knee`: problem listing, sensitivity checks, sub-fronts, knee search
//! and the neighborhood comparison table.
//!
//! Exit codes: 0 success, 1 solver or sensitivity failure, 2 invalid configuration.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pareto_knee::{KneeMethod, NeighborhoodKind};

use output::Format;

/// Invalid configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser, Debug)]
#[command(
    name = "pareto-knee",
    version,
    about = "Pareto sensitivity, most-changing sub-fronts and knee search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One JSON record per registered problem.
    ListProblems,
    /// Analytic Pareto sensitivity vs central finite differences.
    CheckGrad(CheckGradArgs),
    /// Solves the grid and extracts the sub-front of one neighborhood.
    Subfront(SubfrontArgs),
    /// Minimizes the maximal-change function over the simplex.
    Knee(KneeArgs),
    /// Ball / ellipsoid / Cassini comparison on ZLT1, GRV1, VFM1 and ZLT1q.
    Table1(Table1Args),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[arg(long)]
    pub problem: String,
    /// Problem parameter, e.g. `--param r=0.5` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Inner solver tolerance (gradient norm or KKT residual).
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_maxiter: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    pub warm_start: Toggle,
    /// Accepted for compatibility; every method is deterministic.
    #[arg(long)]
    pub seedless: bool,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Directory for artifacts; without it only the summary is printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CheckGradArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Weight vector; defaults to the problem's standard start.
    #[arg(long, value_parser = parse_list)]
    pub lambda: Option<List>,
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaModeArg {
    Fixed,
    Adaptive,
}

#[derive(Args, Debug)]
pub struct SubfrontArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_parser = parse_kind)]
    pub kind: NeighborhoodKind,
    /// Radius, alpha or beta; not used with `--alpha-mode adaptive`.
    #[arg(long)]
    pub size: Option<f64>,
    #[arg(long, value_enum, default_value = "fixed")]
    pub alpha_mode: AlphaModeArg,
    #[arg(long, default_value_t = 0.4)]
    pub adaptive_factor: f64,
    /// Neighborhood center; defaults to the problem's standard start.
    #[arg(long, value_parser = parse_list)]
    pub center: Option<List>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct KneeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, alias = "dfo", value_parser = parse_method, default_value = "nm")]
    pub method: KneeMethod,
    /// Nelder-Mead start; defaults to the problem's standard start.
    #[arg(long, value_parser = parse_list)]
    pub start: Option<List>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Ellipsoid sizing for the MCM trace; defaults per problem.
    #[arg(long, value_enum)]
    pub alpha_mode: Option<AlphaModeArg>,
    #[arg(long, default_value_t = 0.4)]
    pub adaptive_factor: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Skip the grid solves and the MCM trace.
    #[arg(long)]
    pub no_mcm: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    /// One spacing for every problem; defaults to 0.02 (q = 3) and 0.1 (q = 5).
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Comma-separated numbers, e.g. `0.8,0.1,0.1`.
#[derive(Debug, Clone)]
pub struct List(pub Vec<f64>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_kind(s: &str) -> Result<NeighborhoodKind, String> {
    s.parse().map_err(|e: pareto_knee::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<KneeMethod, String> {
    s.parse().map_err(|e: pareto_knee::Error| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use pareto_knee::Error as E;
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::UnknownProblem(_)
            | E::InvalidParameter { .. }
            | E::DimensionMismatch { .. }
            | E::InfeasibleWeights(_)
            | E::InvalidGridStep(_)
            | E::InvalidInput(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
