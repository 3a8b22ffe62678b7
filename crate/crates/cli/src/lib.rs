//! Experiment runner behind the `armlab` binary: TOML configs in, history,
//! summary and plot files out.

pub mod config;
pub mod run;

pub use config::{
    parse_config, parse_config_str, ConfigErrors, Experiment, ExperimentConfig, WORKERS_ENV,
};
pub use run::{run_experiment, EventSink, RunReport};
