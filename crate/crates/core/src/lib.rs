//! Classical simulation of a coherent-state K-nearest-neighbour classifier.
//!
//! The crate models the optical half of the pipeline (Walsh-Hadamard
//! multiports built from balanced beam splitters, a heralding single photon,
//! phase-encoded multimode coherent states and bucket photodetection) and the
//! classical half (distance table, K-nearest selection, majority voting).
//!
//! Everything here is `no_std` with `alloc`. Stochastic operations take an
//! explicit [`rand::Rng`] so callers control seeding.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cdm;
mod error;
pub mod knn;
pub mod matrix;
pub mod optics;
pub mod photonic;
pub mod resources;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Absolute per-entry tolerance used for unitarity and matrix equality checks.
pub const TOLERANCE: f64 = 1e-12;
