//! Batch runner: experiment configs, orchestration and output emission.

pub mod config;
pub mod experiments;
mod run;

pub use config::{validate_config, ConfigError, Diagnostic, Experiment, ExperimentConfig};
pub use run::{
    apply_seed_offset, config_hash, load_config, run, CliError, FileEntry, RunManifest, RunOptions,
    RunStatus, DEFAULT_OUT,
};
