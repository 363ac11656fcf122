use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ruralnet_cli::error::CliError;
use ruralnet_cli::pipeline;
use ruralnet_cli::scenario::load_scenario;

/// Plans rural wireless deployments: access-point positions, a grown
/// backhaul graph, optional non-terrestrial relay nodes, and network
/// metrics.
#[derive(Parser)]
#[command(name = "planner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Random seed; overrides the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the scenario file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph GeoJSON written by gen-backhaul, add-ntbn, or pipeline.
    #[arg(long)]
    graph: PathBuf,
    /// Directory for metrics.json; prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan access-point positions for the configured population.
    PlanAps(RunArgs),
    /// Plan, then grow the terrestrial-only backhaul graph.
    GenBackhaul(RunArgs),
    /// Plan, then sweep the configured non-terrestrial node counts.
    AddNtbn(RunArgs),
    /// Recompute metrics for an existing graph file.
    Analyze(AnalyzeArgs),
    /// Run every stage and write a summary report.
    Pipeline(RunArgs),
    /// Compare the grown graph against the exact minimum-length forest.
    Oracle(RunArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PlanAps(a) => {
            pipeline::run_plan_aps(&load_scenario(&a.config, a.seed, a.out)?)
        }
        Command::GenBackhaul(a) => {
            pipeline::run_gen_backhaul(&load_scenario(&a.config, a.seed, a.out)?)
        }
        Command::AddNtbn(a) => {
            pipeline::run_add_ntbn(&load_scenario(&a.config, a.seed, a.out)?)
        }
        Command::Analyze(a) => pipeline::run_analyze(&a.graph, a.out.as_deref()),
        Command::Pipeline(a) => {
            pipeline::run_pipeline(&load_scenario(&a.config, a.seed, a.out)?)
        }
        Command::Oracle(a) => {
            pipeline::run_oracle(&load_scenario(&a.config, a.seed, a.out)?)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
