//! Command-line front end for `qwalk-core`: TOML experiment configs, a rayon
//! executor, CSV/JSON export and the `qwalk` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod manifest;
pub mod run;

pub use qwalk_core as core;

pub use config::{parse_config, Engine, Experiment, ExperimentConfig};
pub use error::{ConfigError, RunError};
pub use run::{run_experiment, RunOutput};
