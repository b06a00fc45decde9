use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coalgen_cli::config::ExperimentConfig;
use coalgen_cli::run::{calibrated_threshold, KS_QUANTILE};
use coalgen_cli::{run_experiment, CliError, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "coalgen", version, about = "Genealogies of resampled particle populations and their Kingman limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `output_dir`, else `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: machine parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the 99th-percentile KS null threshold for a sample size.
    CalibrateKs {
        /// KS sample size.
        #[arg(long)]
        n: usize,
        /// Simulated null samples.
        #[arg(long)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the inequality suite on a random offspring corpus.
    Bounds {
        #[arg(long)]
        corpus_size: usize,
        #[arg(long)]
        seed: u64,
        /// Simulated clocks for the clock and sum-product checks.
        #[arg(long, default_value_t = 1000)]
        clocks: usize,
        /// Largest block count for the identity envelopes.
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let shown = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config { path: shown.clone(), message: e.to_string() })?;
    let (config, warnings) = ExperimentConfig::from_json_str(&text).map_err(|e| CliError::config(shown.clone(), e))?;
    for w in warnings {
        eprintln!("warning: {shown}: {w}");
    }
    Ok(config)
}

fn execute(config: &ExperimentConfig, options: &RunOptions) -> Result<i32, CliError> {
    let outcome = run_experiment(config, options)?;
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    for file in &outcome.files {
        println!("{}", file.display());
    }
    Ok(outcome.status.exit_code())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, workers, seed } => {
            let mut config = load_config(&config)?;
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            execute(&config, &RunOptions { workers, out_dir: out })
        }
        Command::CalibrateKs { n, replicates, seed } => {
            if n == 0 || replicates == 0 {
                return Err(CliError::Config {
                    path: "calibrate-ks".into(),
                    message: "--n and --replicates must be positive".into(),
                });
            }
            let threshold = calibrated_threshold(seed, n, replicates)?;
            let json = serde_json::json!({
                "master_seed": seed,
                "sample_size": n,
                "null_replicates": replicates,
                "quantile": KS_QUANTILE,
                "threshold": threshold,
            });
            println!("{json}");
            Ok(0)
        }
        Command::Bounds { corpus_size, seed, clocks, n, out, workers } => {
            let text = serde_json::json!({
                "experiment": "bounds_suite",
                "N_grid": [50, 100, 200],
                "n": n,
                "replicates": clocks,
                "master_seed": seed,
                "corpus_size": corpus_size,
            })
            .to_string();
            let (config, _) = ExperimentConfig::from_json_str(&text).map_err(|e| CliError::config("bounds", e))?;
            debug_assert_eq!(config.experiment, ExperimentKind::BoundsSuite);
            execute(&config, &RunOptions { workers, out_dir: out })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
