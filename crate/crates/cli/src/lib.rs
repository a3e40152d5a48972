//! Command-line driver: subcommands for each pipeline stage and config-driven
//! sweeps over seeds.

pub mod commands;
pub mod config;
mod error;
pub mod outputs;
pub mod run;

pub use config::{validate_config, ExperimentConfig};
pub use error::CliError;
pub use run::{run_experiment, verify_manifest, Manifest};
