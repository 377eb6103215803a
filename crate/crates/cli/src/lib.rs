//! Experiment runner behind the `sieve-lab` binary.

pub mod config;
pub mod experiments;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{
    cmd_limit_check, cmd_moments, cmd_shotnoise, cmd_simulate, Report, RunError, RunOutput, TestEntry,
};
