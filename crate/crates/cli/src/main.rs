// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod io;

#[derive(Parser, Debug)]
#[command(
    name = "driftlane",
    version,
    about = "Lane-change decisions behind heavy vehicles as a drift-diffusion process"
)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract heavy-vehicle / car pairs from a trajectory CSV.
    Extract(commands::extract::Args),
    /// Cluster pairs on their feature position.
    Cluster(commands::cluster::Args),
    /// Fit model parameters by censored maximum likelihood.
    Fit(commands::fit::Args),
    /// Drift, passage density and CDF per pair and direction.
    Predict(commands::predict::Args),
    /// Monte-Carlo passage times of the evidence process.
    Simulate(commands::simulate::Args),
    /// Parameter table and cluster summary.
    Report(commands::report::Args),
    /// Synthetic pairs drawn from the model.
    Synth(commands::synth::Args),
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("DRIFTLANE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        io::InputError::new(format!(
            "DRIFTLANE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Extract(a) => commands::extract::run(a, cfg),
        Command::Cluster(a) => commands::cluster::run(a, cfg),
        Command::Fit(a) => commands::fit::run(a, cfg),
        Command::Predict(a) => commands::predict::run(a, cfg),
        Command::Simulate(a) => commands::simulate::run(a, cfg),
        Command::Report(a) => commands::report::run(a),
        Command::Synth(a) => commands::synth::run(a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(io::exit_code(&err))
        }
    }
}
