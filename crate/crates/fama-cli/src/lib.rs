//! Configuration parsing, experiment presets, and CSV emission for the
//! fluid-antenna multiple-access link simulator.

pub mod config;
pub mod error;
pub mod experiments;

pub use config::{parse_config, parse_config_file, preset, Experiment, RunConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, ExperimentOutput};
