//! Experiment runner: a TOML config in, `results.csv`, `summary.txt`,
//! `metadata.toml` and an optional `plot.svg` out.

use std::path::Path;
use std::time::Instant;

use dpp_core::DppError;
use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod outcome;
pub mod registry;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig};
pub use outcome::{Assertion, Outcome, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("experiment {experiment} failed (reproduce with seed {seed}): {source}")]
    Core {
        experiment: String,
        seed: u64,
        #[source]
        source: DppError,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs `cfg` on a pool of `cfg.threads` workers (all cores by default)
/// without writing anything.
pub fn execute(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<(Outcome, usize), CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads.unwrap_or(0)).build()?;
    let threads = pool.current_num_threads();
    let outcome = pool.install(|| experiments::run(cfg, out_dir))?;
    Ok((outcome, threads))
}

/// Runs `cfg` and writes its artifacts into `out_dir`.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let info = registry::find(&cfg.experiment).ok_or_else(|| ConfigError {
        field: Some("experiment".into()),
        line: None,
        message: format!("unknown experiment `{}`", cfg.experiment),
    })?;
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let (outcome, threads) = execute(cfg, Some(out_dir))?;
    outcome.write_artifacts(out_dir, cfg, info, threads, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}
