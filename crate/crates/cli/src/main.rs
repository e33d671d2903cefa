//! `gts`: fit the generalized tempered stable law to price data and report tail risk.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "gts", version, about = "GTS distribution fitting and tail risk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Price CSV.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Parameter JSON (initial point for `fit`).
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Target FRFT grid size, rounded up to a multiple of 12.
    #[arg(long, global = true)]
    grid_m: Option<usize>,
    /// Comma-separated risk levels; values below 0.5 are lower-tail.
    #[arg(long, global = true)]
    levels: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Realized-vol window: month, year or a number of days.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Number of draws for `synth`.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample statistics of log returns, with model moments when --params is given.
    Stats,
    /// Maximum likelihood fit.
    Fit,
    /// Density table with a normal overlay.
    Pdf,
    /// VaR and AVaR at the configured levels.
    Risk,
    /// Realized volatility series.
    Vol,
    /// Seeded synthetic price series drawn from the model.
    Synth,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Fit => "fit",
            Command::Pdf => "pdf",
            Command::Risk => "risk",
            Command::Vol => "vol",
            Command::Synth => "synth",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        input: cli.input,
        params: cli.params,
        grid_m: cli.grid_m,
        levels: cli.levels,
        out: cli.out,
        seed: cli.seed,
        window: cli.window,
        samples: cli.samples,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), overrides)?;
    let (staged, status) = match cli.command {
        Command::Stats => commands::stats(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Pdf => commands::pdf(&cfg),
        Command::Risk => commands::risk(&cfg),
        Command::Vol => commands::vol(&cfg),
        Command::Synth => commands::synth(&cfg),
    }?;
    output::commit(cli.command.name(), &cfg, &staged)?;
    match status {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
