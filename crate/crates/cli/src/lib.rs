//! Experiment harness and command-line front end for `acfilter-core`.

pub mod commands;
pub mod experiments;
pub mod output;
pub mod plot;

pub use commands::{execute, Cli};
pub use experiments::{find, run_experiment, ExperimentSpec, Report, Settings, REGISTRY};
