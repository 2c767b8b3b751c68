//! Batch front door for the chain decoherence simulator.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure
//! in at least one grid cell.

mod cache;
mod config;
mod recipes;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, ExperimentConfig, ExperimentKind};
use runner::{apply_overrides, Overrides};

#[derive(Parser)]
#[command(name = "xychain", version, about = "Two-qubit decoherence in an XY spin chain")]
struct Cli {
    /// Override the config's time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Override the config's maximum time.
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Mode-basis cache directory (default: $XYCHAIN_CACHE if set).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config file.
    Run {
        config: PathBuf,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker thread count.
        #[arg(long)]
        workers: Option<usize>,
        /// Emit gnuplot scripts next to the CSV files.
        #[arg(long)]
        plots: bool,
    },
    /// Run a named built-in sweep (fig2..fig7).
    Recipe {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        plots: bool,
    },
    /// Cross-check the determinant engine against the Fock-space oracle.
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cells: usize,
        #[arg(long, default_value = "out/validate")]
        out: PathBuf,
    },
}

fn execute(cfg: ExperimentConfig, config_text: &str, plots: bool) -> ExitCode {
    match runner::run(&cfg, config_text, plots) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default usage-error code is 2, reserved here for
            // numerical failures
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let base_overrides = Overrides {
        dt: cli.dt,
        t_max: cli.tmax,
        cache_dir: cli.cache.clone(),
        ..Overrides::default()
    };

    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            plots,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            let ov = Overrides {
                out_dir: out,
                workers,
                ..base_overrides
            };
            let cfg = apply_overrides(cfg, &ov);
            execute(cfg, &text, plots)
        }
        Command::Recipe {
            name,
            out,
            workers,
            plots,
        } => {
            let Some(cfg) = recipes::recipe(&name) else {
                eprintln!(
                    "unknown recipe '{name}'; available: {}",
                    recipes::RECIPE_NAMES.join(", ")
                );
                return ExitCode::from(1);
            };
            let ov = Overrides {
                out_dir: out,
                workers,
                ..base_overrides
            };
            let cfg = apply_overrides(cfg, &ov);
            execute(cfg, &format!("recipe:{name}"), plots)
        }
        Command::Validate { seed, cells, out } => {
            let cfg = ExperimentConfig {
                kind: ExperimentKind::OracleValidation,
                seed,
                cells,
                out_dir: out,
                ..ExperimentConfig::default()
            };
            let cfg = apply_overrides(cfg, &base_overrides);
            execute(cfg, &format!("validate:seed={seed},cells={cells}"), false)
        }
    }
}
