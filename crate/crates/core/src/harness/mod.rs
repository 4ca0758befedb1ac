//! Experiment harness: config files, reports and the `bpderiv` CLI.
//! Concrete over `f64`.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use cli::cli_main;
pub use config::{ExperimentConfig, RegionSpec, TargetSpec};
pub use report::{Check, TheoremReport, ThresholdSource};
