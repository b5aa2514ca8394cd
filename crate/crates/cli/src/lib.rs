//! Batch experiment runner: one subcommand per estimator, JSON reports and
//! CSV data, exit codes 0 (pass), 2 (fail), 3 (abstain) and 1 (usage).

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::run;
pub use config::{Command, ExperimentConfig};
pub use error::{CliError, Result};
pub use report::{Report, Table};
