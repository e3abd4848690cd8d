//! Driver for the LDV and DVM solvers: configuration files, runs and CSV
//! output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{case_list, compare, run, RunSummary};
pub use config::{ConfigError, RunConfig};
