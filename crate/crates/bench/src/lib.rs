//! Seeded instance generators and the experiment driver behind the
//! `riemgrad` command-line tool.

pub mod config;
pub mod error;
pub mod generators;
pub mod output;
pub mod rng;
pub mod runner;

pub use config::{Experiment, ExperimentSpec, SpecOverrides, StrategyName};
pub use error::BenchError;
pub use runner::{run_experiment, ExperimentOutput, ResultRow};
