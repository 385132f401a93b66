//! Experiment runner for the `qvac` laboratory: TOML run configurations,
//! invariant suites per module, and deterministic CSV/JSON reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{parse_config, parse_config_with, Experiment, RunConfig};
pub use error::{CliError, Result};
pub use experiments::run_experiment;
pub use report::{emit, Format, ReportRecord};
