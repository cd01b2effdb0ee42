use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seirpinn_cli::commands::{
    cmd_bo_baseline, cmd_bo_proposed, cmd_observability, cmd_simulate, cmd_train_forward,
    cmd_train_inverse, Ctx,
};
use seirpinn_cli::{CliError, RunConfig};

/// SEIR onset-rate estimation: simulator, PINN training loops, GP-BO outer
/// loops, and the symbolic observability check.
#[derive(Parser)]
#[command(name = "seirpinn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; defaults cover the full experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config value).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for data generation (observation sampling).
    #[arg(long, global = true)]
    seed_data: Option<u64>,

    /// Seed for network initialization.
    #[arg(long, global = true)]
    seed_init: Option<u64>,

    /// Seed for the Bayesian-optimization outer loop.
    #[arg(long, global = true)]
    seed_bo: Option<u64>,

    /// Inner-loop epoch count.
    #[arg(long, global = true)]
    epochs: Option<usize>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the ground-truth trajectory and write it as CSV.
    Simulate,
    /// Train once in the fixed-rate mode at `epsilon_candidate`.
    TrainForward,
    /// Train once in the trainable-rate mode from `epsilon_init`.
    TrainInverse,
    /// Full proposed pipeline: GP-BO over the onset rate.
    BoProposed,
    /// Baseline pipeline: GP-BO over the initial rate of the inverse mode.
    BoBaseline,
    /// Compute and verify the reduced Groebner basis of the prolonged ideal.
    Observability,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(s) = cli.seed_data {
        cfg.seed_data = s;
    }
    if let Some(s) = cli.seed_init {
        cfg.seed_init = s;
    }
    if let Some(s) = cli.seed_bo {
        cfg.seed_bo = s;
    }
    if let Some(e) = cli.epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    let ctx = Ctx { quiet: cli.quiet };
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg, &out, &ctx),
        Command::TrainForward => cmd_train_forward(&cfg, &out, &ctx),
        Command::TrainInverse => cmd_train_inverse(&cfg, &out, &ctx),
        Command::BoProposed => cmd_bo_proposed(&cfg, &out, &ctx),
        Command::BoBaseline => cmd_bo_baseline(&cfg, &out, &ctx),
        Command::Observability => cmd_observability(&cfg, &out, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
