//! Experiment registry, configuration and reports for the `parabolic-core`
//! estimates.
//!
//! An experiment is selected by id from [`registry::REGISTRY`], configured by
//! one JSON document merged over its defaults, and produces an
//! [`report::ExperimentReport`] of named checks, ladder tables and fitted
//! constants. Random families and samplers use `ChaCha8Rng` seeded from the
//! configuration, so reports reproduce across platforms.

pub mod bank;
pub mod config;
pub mod error;
pub mod experiments;
pub mod family;
pub mod ratio;
pub mod registry;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use registry::{run_experiment, REGISTRY};
pub use report::ExperimentReport;
