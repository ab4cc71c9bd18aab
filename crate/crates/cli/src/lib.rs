//! Command-line runner for the homoeoid experiments.
//!
//! [`run`] validates a [`RunConfig`], executes one experiment and writes
//! `results.csv` and `summary.json` into the output directory;
//! [`emit_report`] merges a tree of such runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

use std::path::PathBuf;

pub use config::{dyadic_grid, parse_delta_grid, Experiment, RunConfig};
pub use error::CliError;
pub use output::{Cell, Outcome, Summary, Table};
pub use report::{emit_report, Report};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "HOMOEOID_THREADS";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub outcome: Outcome,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunOutput {
    /// 0 on pass, 1 on a violated threshold; exploratory runs always pass.
    pub fn exit_code(&self) -> i32 {
        if self.outcome.pass || self.experiment.is_exploratory() {
            0
        } else {
            1
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let outcome = experiments::execute(cfg)?;
    let (csv_path, summary_path) = output::write_artifacts(&cfg.out, cfg, &outcome)?;
    Ok(RunOutput {
        experiment: cfg.experiment,
        outcome,
        csv_path,
        summary_path,
    })
}

/// [`run`] on a dedicated pool of `threads` workers, or the global pool.
pub fn run_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<RunOutput, CliError> {
    match threads {
        None => run(cfg),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| run(cfg)),
    }
}

/// Worker cap from [`THREADS_ENV`]; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}
