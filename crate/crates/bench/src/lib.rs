//! Experiment harness for the geopriv mechanisms.
//!
//! Each task (`identity`, `knn`, `hull`, `verify`) expands an
//! [`ExperimentConfig`] into a grid of cells, runs every cell's trials in
//! parallel on independent random streams and summarises them into
//! [`ResultRow`]s. Output is deterministic for a fixed config and seed.

pub mod config;
pub mod data;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, InputSpec, SyntheticKind, Task};
pub use experiments::{
    all_checks_passed, hull_samples, identity_samples, knn_samples, run, run_hull, run_identity, run_knn, run_verify,
    CellSamples, Mechanism,
};
pub use report::{write_csv, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] geopriv::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
