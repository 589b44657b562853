//! Balanced two-class, two-feature synthetic datasets.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::LabeledDataset;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticFamily {
    HalfMoons,
    Blobs,
    ConcentricCircles,
    Spirals,
}

impl SyntheticFamily {
    pub const ALL: [SyntheticFamily; 4] = [
        SyntheticFamily::HalfMoons,
        SyntheticFamily::Blobs,
        SyntheticFamily::ConcentricCircles,
        SyntheticFamily::Spirals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticFamily::HalfMoons => "half_moons",
            SyntheticFamily::Blobs => "blobs",
            SyntheticFamily::ConcentricCircles => "concentric_circles",
            SyntheticFamily::Spirals => "spirals",
        }
    }

    /// Default per-coordinate Gaussian noise.
    pub fn default_noise(self) -> f64 {
        match self {
            SyntheticFamily::HalfMoons => 0.1,
            SyntheticFamily::Blobs => 0.45,
            SyntheticFamily::ConcentricCircles => 0.08,
            SyntheticFamily::Spirals => 0.05,
        }
    }
}

impl fmt::Display for SyntheticFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticFamily {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        SyntheticFamily::ALL
            .into_iter()
            .find(|f| f.name() == norm || (norm == "moons" && *f == SyntheticFamily::HalfMoons) || (norm == "circles" && *f == SyntheticFamily::ConcentricCircles))
            .ok_or_else(|| BenchError::Config(format!("unknown synthetic family {s:?}")))
    }
}

/// Shape parameters for the generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticShape {
    pub moon_radius: f64,
    /// Vertical drop of the second moon below the first.
    pub moon_offset: f64,
    pub blob_centers: [(f64, f64); 2],
    pub circle_radii: (f64, f64),
    /// Spiral radius `r = start + pitch·t`.
    pub spiral_start: f64,
    pub spiral_pitch: f64,
    /// Number of turns swept by each arm.
    pub spiral_turns: f64,
}

impl Default for SyntheticShape {
    fn default() -> Self {
        Self {
            moon_radius: 1.0,
            moon_offset: 0.5,
            blob_centers: [(-1.0, -1.0), (1.0, 1.0)],
            circle_radii: (1.0, 0.5),
            spiral_start: 0.1,
            spiral_pitch: 0.35,
            spiral_turns: 1.75,
        }
    }
}

/// `count` points, `count/2` per class, with Gaussian noise of standard
/// deviation `noise_sigma` added to each coordinate.
pub fn generate_synthetic(family: SyntheticFamily, count: usize, noise_sigma: f64, seed: u64) -> Result<LabeledDataset> {
    generate_with_shape(family, count, noise_sigma, seed, &SyntheticShape::default())
}

pub fn generate_with_shape(
    family: SyntheticFamily,
    count: usize,
    noise_sigma: f64,
    seed: u64,
    shape: &SyntheticShape,
) -> Result<LabeledDataset> {
    if count < 2 || !count.is_multiple_of(2) {
        return Err(BenchError::Config(format!("synthetic count must be even and at least 2, got {count}")));
    }
    let bad_sigma = || BenchError::Config(format!("noise sigma must be finite and non-negative, got {noise_sigma}"));
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(bad_sigma());
    }
    let noise = Normal::new(0.0, noise_sigma).map_err(|_| bad_sigma())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = count / 2;
    let mut features = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for label in 0..2usize {
        for _ in 0..half {
            let (x, y) = match family {
                SyntheticFamily::HalfMoons => {
                    let t = rng.random_range(0.0..=PI);
                    let r = shape.moon_radius;
                    if label == 0 {
                        (r * t.cos(), r * t.sin())
                    } else {
                        (r - r * t.cos(), r - r * t.sin() - shape.moon_offset)
                    }
                }
                SyntheticFamily::Blobs => shape.blob_centers[label],
                SyntheticFamily::ConcentricCircles => {
                    let t = rng.random_range(0.0..TAU);
                    let r = if label == 0 { shape.circle_radii.0 } else { shape.circle_radii.1 };
                    (r * t.cos(), r * t.sin())
                }
                SyntheticFamily::Spirals => {
                    let t = rng.random_range(0.0..=TAU * shape.spiral_turns);
                    let r = shape.spiral_start + shape.spiral_pitch * t;
                    let phase = if label == 0 { 0.0 } else { PI };
                    (r * (t + phase).cos(), r * (t + phase).sin())
                }
            };
            features.push(vec![x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
            labels.push(label);
        }
    }
    LabeledDataset::new(
        family.name(),
        vec!["feature_1".into(), "feature_2".into()],
        features,
        labels,
        vec!["0".into(), "1".into()],
    )
}
