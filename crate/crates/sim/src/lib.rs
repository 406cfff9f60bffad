//! Configuration-driven experiment runner for `dcx-core`.
//!
//! A run reads a TOML or JSON config, executes each listed scenario in order
//! (each one parallel over replications) and writes `<id>.json` and
//! `<id>.csv` into the output directory. Given the same config and seed the
//! outputs are byte-identical apart from the `runtime_seconds` field, for
//! any thread count.

pub mod config;
pub mod parallel;
pub mod run;
pub mod scenarios;
pub mod table;

pub use config::Config;
pub use parallel::Parallel;
pub use run::{run_config, run_scenario, Report, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl SimError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Runtime(_) => 3,
        }
    }
}
