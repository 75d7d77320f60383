use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xlwave::experiments::{cmd_beamtrain, cmd_jaccard_map, cmd_spectrum, ExperimentConfig};

/// Near-field XL-array wave-number domain experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Numerical, stationary-phase and angular spectra of one user.
    Spectrum(Common),
    /// Interval accuracy over a grid of user distances and directions.
    JaccardMap(Common),
    /// Monte-Carlo comparison of the beam-training schemes.
    Beamtrain(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `training.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> xlwave::Result<PathBuf> {
    let (common, pick): (&Common, fn(&ExperimentConfig) -> PathBuf) = match &cli.command {
        Command::Spectrum(c) => (c, |e| e.output.spectrum.clone()),
        Command::JaccardMap(c) => (c, |e| e.output.jaccard_map.clone()),
        Command::Beamtrain(c) => (c, |e| e.output.beamtrain.clone()),
    };
    let mut exp = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        exp.training.master_seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| pick(&exp));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(xlwave::Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| xlwave::Error::Config(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Spectrum(_) => cmd_spectrum(&exp, &out),
        Command::JaccardMap(_) => cmd_jaccard_map(&exp, &out),
        Command::Beamtrain(_) => cmd_beamtrain(&exp, &out),
    })?;
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
