//! Command implementations and file formats behind the `lblab` binary.
//!
//! * [`history_file`]: the `lblog/1` prediction-history format, the
//!   ingestion point for histories produced elsewhere.
//! * [`tables`]: scores/ranks, histogram and correlation CSV files.
//! * [`manifest`]: experiment manifests for `lblab train`.
//! * [`commands`]: `train`, `analyze`, `compare`, `demo-cross-optimizer`, `synth`.

pub mod commands;
pub mod error;
pub mod fsutil;
pub mod history_file;
pub mod manifest;
pub mod tables;

pub use error::{CliError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LBLAB_THREADS";

/// Configures the global rayon pool from `LBLAB_THREADS`, if set.
pub fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}=`{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
