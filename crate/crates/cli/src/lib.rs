//! Scenario runner for the `gie` command-line tool.

pub mod app;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse, LoadedConfig, ScenarioConfig};
pub use error::{CliError, FieldError};
pub use run::Command;
