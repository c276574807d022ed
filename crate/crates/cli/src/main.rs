mod commands;
mod config;
mod error;
mod fsutil;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, LevelFilter};

use crate::commands::{
    EvaluateArgs, FilterArgs, PlotArgs, ReconstructArgs, RetargetArgs, SimulateArgs, StatsArgs, SynthArgs,
};
use crate::config::CONFIG_DIR_ENV;
use crate::error::CliError;

/// Pedestrian motion pipeline: filter, reconstruct, retarget, simulate, evaluate and plot.
#[derive(Parser, Debug)]
#[command(name = "pedsim", version)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads for batch stages (defaults to the config file, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON config file; defaults to `$PEDSIM_CONFIG_DIR/pedsim.json` when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded synthetic motion corpus and scenario specs.
    Synth(SynthArgs),
    /// Keep motions whose annotation matches a keyword and tag them.
    Filter(FilterArgs),
    /// Integrate root velocities into global trajectories.
    Reconstruct(ReconstructArgs),
    /// Convert motions to target-skeleton clips.
    Retarget(RetargetArgs),
    /// Classify trajectories and aggregate per-class curves and tag counts.
    Stats(StatsArgs),
    /// Run scenarios against a planner and write event logs.
    Simulate(SimulateArgs),
    /// Compute safety metrics from logs.
    Evaluate(EvaluateArgs),
    /// Render SVG charts from a stats or report document.
    Plot(PlotArgs),
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let env_dir = std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from);
    let cfg = config::load(cli.config.as_deref(), env_dir.as_deref())?;
    if let Some(n) = cli.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Processing(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Filter(a) => commands::filter(a, &cfg),
        Command::Reconstruct(a) => commands::reconstruct(a, &cfg),
        Command::Retarget(a) => commands::retarget(a, &cfg),
        Command::Stats(a) => commands::stats(a, &cfg),
        Command::Simulate(a) => commands::simulate(a, &cfg),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Plot(a) => commands::plot(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
