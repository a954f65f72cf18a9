//! Experiment driver for the latent variable proximal Galerkin library.
//!
//! Every subcommand reads an optional TOML file (`--config`) whose keys are
//! the long flag names with `_` for `-`; flags given on the command line
//! override the file. Results go to `--out` (default `out/`).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Status;
use config::{ConfigError, ExperimentConfig};

const CSV_LAYOUT: &str = "\
CSV files start with `#` comment lines: tool version, git revision, the
resolved configuration (`config.<key> = value`) and run metadata. Columns:

  obstacle_<problem>_L<level>.csv  k,alpha,inc_h1,inc_l2,newton_its,lin_solves,energy
  obstacle_<problem>_errors.csv    level,cells,h,iterations,lin_solves,converged,h1_error,
                                   l2_error,lambda_l2_error,complementarity,
                                   primal_infeasibility,dual_infeasibility
  advdiff_report.csv               level,n,method,min,max,violations,l2_error
                                   (method: galerkin, proximal = sigmoid of the latent
                                   field, proximal_primal = the H1 iterate)
  topopt_L<level>.csv              k,alpha,objective,increment,eta,constraint_error
  rates_<case>.csv                 k,alpha,partial_sum,error_ratio
  verify.csv                       check,delta,bound,within_bound

Numbers carry six significant digits. Exit status: 0 on success, 1 on a
configuration error, 2 when a solver did not converge.
Set LVPP_THREADS to cap the number of worker threads.";

#[derive(Parser)]
#[command(name = "lvpp", version, about = "Latent variable proximal Galerkin experiments", after_help = CSV_LAYOUT)]
struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Obstacle benchmarks: iteration CSV, final-field VTK and an error table.
    Obstacle {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Eriksson-Johnson benchmark: bound violation report of Galerkin vs proximal solutions.
    Advdiff {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Cantilever topology optimization by entropic mirror descent.
    Topopt {
        #[command(flatten)]
        cfg: ExperimentConfig,
        /// Write a density VTK file every this many steps (0 writes only the final one).
        #[arg(long, default_value_t = 5)]
        checkpoint: usize,
    },
    /// Step sizes, partial sums and error ratios of a schedule.
    Rates {
        #[command(flatten)]
        cfg: ExperimentConfig,
        /// Schedule to tabulate, e.g. `geo:2`.
        #[arg(long)]
        case: String,
        /// Number of steps.
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Compare solver paths against the brute-force oracles.
    Verify {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("LVPP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ConfigError(format!("LVPP_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("cannot configure the thread pool: {e}"))
}

fn run(cli: Cli) -> Result<Status> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => ExperimentConfig::default(),
    };
    match cli.command {
        Command::Obstacle { cfg } => commands::obstacle(&cfg.overlay(file)),
        Command::Advdiff { cfg } => commands::advdiff(&cfg.overlay(file)),
        Command::Topopt { cfg, checkpoint } => commands::topopt(&cfg.overlay(file), checkpoint),
        Command::Rates { cfg, case, k } => commands::rates(&cfg.overlay(file), &case, k),
        Command::Verify { cfg } => commands::verify(&cfg.overlay(file)),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let nonconvergence =
        err.chain().filter_map(|e| e.downcast_ref::<lvpp::Error>()).any(lvpp::Error::is_convergence_failure);
    if nonconvergence {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Converged) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("error: at least one solve stopped before reaching its tolerance");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
