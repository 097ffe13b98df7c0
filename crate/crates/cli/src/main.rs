mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outputs;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "polardeg",
    version,
    about = "Degree of quantum polarisation for two-mode states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Per-mode Fock cutoff d.
    #[arg(long, global = true)]
    dim: Option<usize>,

    /// Largest manifold analysed.
    #[arg(long, global = true)]
    nmax: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// P1 and P1sc of one state, optionally swept over a parameter.
    Polarisation,
    /// Coherent and squeezed-vacuum curves against mean photon number.
    SweepFig1,
    /// P1 and P1sc over the three two-mode grids.
    GridFig2,
    /// Squeezed H mode against a displaced V mode, plus the manifold inset.
    SweepFig4,
    /// Simulated homodyne or PNRD measurement with bootstrap error bars.
    Tomo,
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.dim.is_some() {
        cfg.space.dim = cli.dim;
    }
    if cli.nmax.is_some() {
        cfg.space.n_max = cli.nmax;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let dir = cli
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = Outputs::new(dir)?;
    match cli.command {
        Command::Polarisation => commands::polarisation(&cfg, &out),
        Command::SweepFig1 => commands::sweep_fig1(&cfg, &out),
        Command::GridFig2 => commands::grid_fig2(&cfg, &out),
        Command::SweepFig4 => commands::sweep_fig4(&cfg, &out),
        Command::Tomo => commands::tomo(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
