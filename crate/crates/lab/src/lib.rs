//! Experiment harness: configuration, seeding, worker pool, and the CSV/JSON
//! artifacts of every experiment.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, RunConfig};
pub use output::{Check, ExperimentReport, Manifest, TableRef};

use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] swe_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Validation(_) => "validation",
            LabError::Core(swe_core::Error::BudgetExceeded(_)) => "budget",
            LabError::Core(_) => "runtime",
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            _ => 3,
        }
    }

    /// Machine-readable form printed by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        let messages = match self {
            LabError::Validation(m) => m.clone(),
            other => vec![other.to_string()],
        };
        serde_json::json!({ "error": { "kind": self.kind(), "messages": messages } })
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Worker count from `SWE_LAB_WORKERS`; `None` leaves the choice to rayon.
pub fn workers_from_env() -> std::result::Result<Option<usize>, LabError> {
    match std::env::var("SWE_LAB_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(LabError::Validation(vec![format!("SWE_LAB_WORKERS: `{v}` is not a positive integer")])),
        },
    }
}

/// Runs `config` on a pool of `workers` threads, writing every artifact into `out`.
///
/// Each sample or scan cell draws from a key derived from `(root_seed, experiment,
/// index)` and results are reduced in index order, so outputs do not depend on
/// the worker count.
pub fn run(config: &RunConfig, out: &Path, workers: Option<usize>) -> Result<ExperimentReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Io(std::io::Error::other(e.to_string())))?;
    let threads = pool.current_num_threads();
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let mut sink = output::Sink::new(out);
    let outcome = pool.install(|| experiments::dispatch(config, &mut sink))?;
    let manifest = Manifest::new(config, threads, start.elapsed().as_secs_f64(), sink.tables.clone(), &outcome);
    manifest.write(out)?;
    Ok(ExperimentReport { manifest, summary: outcome.summary, checks: outcome.checks })
}
