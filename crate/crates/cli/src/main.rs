//! `lassoboot` command line: fit, bootstrap, simulate, report.

mod commands;
mod config;
mod fsio;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Errors carry the process exit code: 2 for usage/input problems,
/// 3 for solver non-convergence.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn no_convergence(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<lassoboot::Error> for CliError {
    fn from(e: lassoboot::Error) -> Self {
        match e {
            lassoboot::Error::TooManyFlagged { .. } => CliError::no_convergence(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "lassoboot", version, about = "Bootstrap inference for the Lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the Lasso to a CSV dataset (first column is the response).
    Fit {
        /// JSON config; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input CSV (header row; column 1 = response, the rest covariates).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Penalty; omit to select by cross-validation.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores). Never changes results.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Draw bootstrap replicates and write T* plus confidence intervals.
    Bootstrap {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// perturbation | naive | residual | paired
        #[arg(long)]
        scheme: Option<String>,
        /// Number of bootstrap replicates.
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a Monte Carlo coverage experiment.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Empirical coverage ratios from two coverage tables.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Coverage CSV of the perturbation bootstrap (numerator).
        #[arg(long)]
        pb: Option<PathBuf>,
        /// Coverage CSV of the competing method (denominator).
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit {
            config,
            input,
            lambda,
            seed,
            out,
            threads,
        } => with_pool(threads, || {
            let cfg = config::FitConfig::resolve(config.as_deref(), input, lambda, seed)?;
            commands::cmd_fit(&cfg, &out)
        }),
        Command::Bootstrap {
            config,
            input,
            scheme,
            b,
            level,
            lambda,
            seed,
            out,
            threads,
        } => with_pool(threads, || {
            let cfg = config::BootstrapConfig::resolve(
                config.as_deref(),
                input,
                scheme,
                b,
                level,
                lambda,
                seed,
            )?;
            commands::cmd_bootstrap(&cfg, &out)
        }),
        Command::Simulate {
            config,
            seed,
            level,
            out,
            threads,
        } => with_pool(threads, || {
            let cfg = config::SimulateConfig::resolve(config.as_deref(), seed, level)?;
            commands::cmd_simulate(&cfg, &out)
        }),
        Command::Report {
            config,
            pb,
            other,
            out,
        } => (|| {
            let cfg = config::ReportConfig::resolve(config.as_deref(), pb, other)?;
            commands::cmd_report(&cfg, &out)
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn with_pool(threads: Option<usize>, body: impl FnOnce() -> CliResult<()> + Send) -> CliResult<()> {
    match threads {
        None => body(),
        Some(k) => {
            if k == 0 {
                return Err(CliError::usage("--threads must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))?;
            pool.install(body)
        }
    }
}
