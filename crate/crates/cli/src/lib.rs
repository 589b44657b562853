//! Datasets, experiment drivers and file formats around `coherent-knn-core`.

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod synthetic;

pub use error::{BenchError, Result};
