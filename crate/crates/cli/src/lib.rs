//! Experiment runner for quantum walk search: reproduces the critical-coupling
//! and optimum tables and the figure data from a TOML configuration.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Overrides, RawConfig};
pub use error::CliError;
pub use run::{run_figures, run_optimize, run_spectrum, run_tables, RunOutput, TableRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Tables,
    Figures,
    Optimize,
}

/// Validates the configuration, computes inside a pool of `threads` workers
/// (0 = one per core) and writes the artifacts.
pub fn execute(
    command: Command,
    raw: &RawConfig,
    threads: usize,
) -> Result<(RunOutput, Vec<PathBuf>), CliError> {
    let cfg = ExperimentConfig::from_raw(raw)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))?;
    let out = pool.install(|| match command {
        Command::Spectrum => run_spectrum(&cfg),
        Command::Tables => run_tables(&cfg),
        Command::Figures => run_figures(&cfg),
        Command::Optimize => run_optimize(&cfg),
    })?;
    let written = out.write(&cfg)?;
    Ok((out, written))
}
