//! `swarmkit` batch front-end.
//!
//! ```text
//! swarmkit run <config> [--out DIR] [--seed S] [--workers K]
//! swarmkit sweep <config> [--out DIR] [--seed S] [--workers K]
//! ```
//!
//! `run` executes any experiment kind; `sweep` insists on a particle sweep.
//! The worker count defaults to `SWARMKIT_WORKERS`, then to the number of
//! available cores.

mod config;
mod error;
mod experiment;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::{run_experiment, MANIFEST};

#[derive(Debug, Parser)]
#[command(
    name = "swarmkit",
    version,
    about = "Particle swarm and mean-field optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single experiment described by a config file.
    Run(RunArgs),
    /// Run a particle parameter sweep and write its table.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config.
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seeds.master`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "SWARMKIT_WORKERS")]
    workers: Option<usize>,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut config = parse_config(&text)?;
    if let Some(dir) = &args.out {
        config.output.dir = dir.to_string_lossy().into_owned();
    }
    if let Some(seed) = args.seed {
        config.seeds.master = seed;
    }
    config.validate()?;
    Ok(config)
}

fn start_workers(workers: Option<usize>) -> Result<(), CliError> {
    let Some(k) = workers else {
        return Ok(());
    };
    if k == 0 {
        return Err(CliError::invalid("--workers", "must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Pool {
            workers: k,
            reason: e.to_string(),
        })?;
    Ok(())
}

fn execute(command: Command) -> Result<PathBuf, CliError> {
    let (args, sweep_only) = match command {
        Command::Run(args) => (args, false),
        Command::Sweep(args) => (args, true),
    };
    let config = load(&args)?;
    if sweep_only && !config.kind.is_sweep() {
        return Err(CliError::invalid(
            "kind",
            "`sweep` needs a particle_sweep config; use `run` for the others",
        ));
    }
    start_workers(args.workers)?;
    let manifest = run_experiment(&config)?;
    Ok(PathBuf::from(&manifest.config.output.dir).join(MANIFEST))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
