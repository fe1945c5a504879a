//! Reproducible experiment runner for the two-point-source IRTR study.
//!
//! Each figure is a pure function of an [`ExperimentConfig`] producing CSV tables;
//! [`run`] writes them together with a JSON manifest of checksums.

pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod runners;

pub use config::{ExperimentConfig, FigureId, MeasurementKind, Overrides};
pub use error::{LabError, LabResult};
pub use output::{RunManifest, Table};
pub use runners::{compute, run, FigureOutput, RegretRow};
