//! Experiment runner for `rggclt-core`: strict JSON configs, JSONL record
//! streams and CSV/JSON summaries.
//!
//! Exit codes: 0 on success, 2 when a simulation would exceed the expected
//! point cap, 1 for every other failure (bad arguments, invalid config,
//! numerical or I/O errors).

pub mod config;
pub mod error;
pub mod run;
pub mod summary;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, ExperimentConfig};
pub use error::CliError;

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "RGGCLT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rggclt", version, about = "Edge counts of high-dimensional random geometric graphs")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to RGGCLT_THREADS, then the core count.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match (flag, std::env::var(THREADS_ENV)) {
        (Some(n), _) => n,
        (None, Ok(s)) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
        (None, Err(_)) => return Ok(None),
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(Some(n))
}

/// Runs one invocation and returns the process exit code.
pub fn main_with(args: Args) -> u8 {
    match execute(&args) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> Result<serde_json::Value, CliError> {
    if let Some(n) = thread_count(args.threads)? {
        rggclt_core::exec::configure_threads(n).map_err(CliError::Config)?;
    }
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    run::run(args.command, &config, &args.out)
}
