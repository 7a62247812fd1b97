//! Thin command-line front end over [`evosim::cli`]. All argument parsing
//! lives here; the command logic is library code so tests and examples can
//! drive it directly. Exit codes: 0 success, 1 runtime failure, 2 usage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evosim::cli::{self, CliError, Overrides, Suite};

#[derive(Parser)]
#[command(
    name = "evosim",
    version,
    about = "Deterministic simulator for asynchronous evolutionary search with hidden evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config and write its artifacts.
    Run {
        /// Path to the experiment config (JSON; `{}` uses all defaults).
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the config's checkpoint times (comma-separated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        checkpoints: Option<Vec<f64>>,
    },
    /// Run a paired ablation suite: the configured system vs one removal.
    Ablate {
        /// Which component to ablate: gpus, evolution, hce, or operators.
        suite: String,
        /// Path to the base experiment config (JSON).
        config: PathBuf,
        /// Replace the config's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the config's checkpoint times (comma-separated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        checkpoints: Option<Vec<f64>>,
    },
    /// Fit the performance law to an observations CSV.
    Fit {
        /// CSV with columns n_agents, time, performance.
        csv: PathBuf,
        /// Pin beta to this value and fit only alpha and gamma.
        #[arg(long)]
        freeze_beta: Option<f64>,
        /// Directory for fit_report.json (default: out).
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Tabulate the compute-optimal frontier for given law parameters.
    Frontier {
        #[arg(long, default_value_t = 0.973)]
        alpha: f64,
        #[arg(long, default_value_t = 4.854)]
        beta: f64,
        #[arg(long, default_value_t = 2.631)]
        gamma: f64,
        /// Budgets to tabulate (comma-separated; default 8,24,72,192,576).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        budgets: Option<Vec<f64>>,
        /// Directory for frontier.csv (default: out).
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run the self-verification suite; prints one PASS/FAIL line per check.
    Verify {
        /// Seed for the randomized checks and the reproducibility run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            seed,
            out_dir,
            checkpoints,
        } => cli::cmd_run(
            &config,
            &Overrides {
                seed,
                out_dir,
                checkpoints,
            },
        )
        .map(|_| ()),
        Command::Ablate {
            suite,
            config,
            seed,
            out_dir,
            checkpoints,
        } => {
            let suite = Suite::parse_name(&suite).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown suite {suite:?} (expected gpus, evolution, hce, or operators)"
                ))
            })?;
            cli::cmd_ablate(
                suite,
                &config,
                &Overrides {
                    seed,
                    out_dir,
                    checkpoints,
                },
            )
            .map(|_| ())
        }
        Command::Fit {
            csv,
            freeze_beta,
            out_dir,
        } => cli::cmd_fit(&csv, freeze_beta, &out_dir),
        Command::Frontier {
            alpha,
            beta,
            gamma,
            budgets,
            out_dir,
        } => cli::cmd_frontier(alpha, beta, gamma, budgets, &out_dir),
        Command::Verify { seed } => cli::cmd_verify(seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
