//! Phase encoding of features and the coherent distance metric (CDM).
//!
//! Features are min-max scaled into phases in `[0, π/2]`. For two phase
//! vectors the CDM is `Σ_k (1 − cos(θ_k − θ̃_k))`, which the circuit reads
//! out through the vacuum probability of the difference ports:
//! `d = −(N/|α|²)·ln P(0)`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::photonic::{
    apply_loss, encode_phases, interfere_pairs, no_click_probability, sample_detection,
    split_resource_coherent, CoherentAmplitudeVector, NoiseModel,
};
use crate::{Error, Result};

/// Per-feature minimum and maximum seen in the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl ScalerParams {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                found: max.len(),
            });
        }
        for (&lo, &hi) in min.iter().zip(&max) {
            if !lo.is_finite() {
                return Err(Error::NonFinite(lo));
            }
            if !hi.is_finite() {
                return Err(Error::NonFinite(hi));
            }
            if hi < lo {
                return Err(Error::InvalidArgument("scaler max below min"));
            }
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    /// Feature `k` is constant across the training data.
    pub fn is_degenerate(&self, k: usize) -> bool {
        self.max[k] == self.min[k]
    }
}

/// Phases `θ_k ∈ [0, π/2]`, one per encoded feature mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFeatureVector {
    phases: Vec<f64>,
}

impl PhaseFeatureVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(&p) = phases.iter().find(|p| !(0.0..=FRAC_PI_2).contains(*p)) {
            return Err(Error::PhaseOutOfRange(p));
        }
        Ok(Self { phases })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Extends with zero phases up to `len` modes. Padded modes carry the
    /// same phase on both sides of a comparison and so add nothing to the
    /// distance.
    pub fn padded(&self, len: usize) -> Self {
        let mut phases = self.phases.clone();
        if phases.len() < len {
            phases.resize(len, 0.0);
        }
        Self { phases }
    }

    /// Padding up to the next power of two, as the multiports require.
    pub fn padded_to_power_of_two(&self) -> Self {
        self.padded(self.phases.len().max(1).next_power_of_two())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.phases
    }
}

/// Column-wise min and max of the training rows.
pub fn fit_scaler<R: AsRef<[f64]>>(rows: &[R]) -> Result<ScalerParams> {
    let first = rows.first().ok_or(Error::Empty("training features"))?.as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for row in rows {
        let row = row.as_ref();
        if row.len() != min.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                found: row.len(),
            });
        }
        for (k, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    ScalerParams::new(min, max)
}

/// `θ_k = (π/2)·(x_k − min_k)/(max_k − min_k)`, clamped into `[0, π/2]`.
/// Degenerate features map to 0.
pub fn to_phases(x: &[f64], scaler: &ScalerParams) -> Result<PhaseFeatureVector> {
    if x.len() != scaler.len() {
        return Err(Error::DimensionMismatch {
            expected: scaler.len(),
            found: x.len(),
        });
    }
    let phases = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
            if scaler.is_degenerate(k) {
                return Ok(0.0);
            }
            let frac = (v - scaler.min[k]) / (scaler.max[k] - scaler.min[k]);
            Ok((FRAC_PI_2 * frac).clamp(0.0, FRAC_PI_2))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseFeatureVector { phases })
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `Σ_k (1 − cos(θ_k − θ̃_k))`.
pub fn cdm_exact(theta: &[f64], theta_tilde: &[f64]) -> Result<f64> {
    check_lengths(theta, theta_tilde)?;
    Ok(theta
        .iter()
        .zip(theta_tilde)
        .map(|(a, b)| 1.0 - libm::cos(a - b))
        .sum())
}

/// `Σ_k |θ_k − θ̃_k|`.
pub fn manhattan(theta: &[f64], theta_tilde: &[f64]) -> Result<f64> {
    check_lengths(theta, theta_tilde)?;
    Ok(theta.iter().zip(theta_tilde).map(|(a, b)| (a - b).abs()).sum())
}

/// Inverts the vacuum probability into a distance, `−(N/|α|²)·ln p₀`.
pub fn cdm_from_probability(p0: f64, modes: usize, alpha_sq: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::InvalidProbability(p0));
    }
    if !(alpha_sq > 0.0 && alpha_sq.is_finite()) {
        return Err(Error::InvalidArgument("|alpha|^2 must be positive"));
    }
    // -0.0 at p0 = 1
    Ok((-(modes as f64) / alpha_sq * libm::log(p0)).max(0.0))
}

/// A distance estimated from simulated photodetection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdmEstimate {
    pub distance: f64,
    /// Clamped fraction of runs in which no difference-port detector fired.
    pub p0_hat: f64,
    pub runs: u64,
    pub silent_runs: u64,
    pub std_error: f64,
}

/// The difference-port amplitudes reached by one training/test pair.
///
/// Both phase vectors are padded to the next power of two; loss acts on each
/// encoded state before the interference stage.
pub fn difference_ports(
    theta: &PhaseFeatureVector,
    theta_tilde: &PhaseFeatureVector,
    alpha: Complex64,
    noise: &NoiseModel,
) -> Result<CoherentAmplitudeVector> {
    check_lengths(theta.as_slice(), theta_tilde.as_slice())?;
    let theta = theta.padded_to_power_of_two();
    let theta_tilde = theta_tilde.padded_to_power_of_two();
    let resource = split_resource_coherent(alpha, theta.len())?;
    let train = apply_loss(&encode_phases(&resource, &theta)?, noise);
    let test = apply_loss(&encode_phases(&resource, &theta_tilde)?, noise);
    Ok(interfere_pairs(&train, &test)?.1)
}

fn finish_estimate(silent: u64, runs: u64, modes: usize, alpha_sq: f64) -> Result<CdmEstimate> {
    let floor = libm::exp(-alpha_sq).max(0.5 / runs as f64);
    let p0_hat = (silent as f64 / runs as f64).clamp(floor, 1.0);
    let distance = cdm_from_probability(p0_hat, modes, alpha_sq)?;
    let std_error = modes as f64 / alpha_sq * libm::sqrt((1.0 - p0_hat) / (p0_hat * runs as f64));
    Ok(CdmEstimate {
        distance,
        p0_hat,
        runs,
        silent_runs: silent,
        std_error,
    })
}

fn check_estimate_args(alpha: Complex64, runs: u64) -> Result<f64> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1"));
    }
    let alpha_sq = alpha.norm_sqr();
    if !(alpha_sq > 0.0 && alpha_sq.is_finite()) {
        return Err(Error::InvalidArgument("|alpha|^2 must be positive"));
    }
    Ok(alpha_sq)
}

/// Estimates the CDM by simulating `runs` detection rounds one by one and
/// counting the rounds in which every difference-port detector stays silent.
pub fn estimate_cdm<R: Rng + ?Sized>(
    theta: &PhaseFeatureVector,
    theta_tilde: &PhaseFeatureVector,
    alpha: Complex64,
    runs: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CdmEstimate> {
    let alpha_sq = check_estimate_args(alpha, runs)?;
    let diff = difference_ports(theta, theta_tilde, alpha, noise)?;
    let mut silent = 0u64;
    for _ in 0..runs {
        if sample_detection(&diff, noise, 0, rng).all_silent() {
            silent += 1;
        }
    }
    finish_estimate(silent, runs, diff.mode_count(), alpha_sq)
}

/// Same estimator as [`estimate_cdm`], drawing the silent-round count in one
/// step. Rounds are independent and a round is silent with probability
/// `Π_k e^{−τ|β_k|²}`, so the count is binomial; this is the form used for
/// large run counts.
pub fn estimate_cdm_aggregated<R: Rng + ?Sized>(
    theta: &PhaseFeatureVector,
    theta_tilde: &PhaseFeatureVector,
    alpha: Complex64,
    runs: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CdmEstimate> {
    let alpha_sq = check_estimate_args(alpha, runs)?;
    let diff = difference_ports(theta, theta_tilde, alpha, noise)?;
    let p_silent: f64 = diff
        .amplitudes()
        .iter()
        .map(|&b| no_click_probability(b, noise.tau()))
        .product();
    let silent = Binomial::new(runs, p_silent.clamp(0.0, 1.0))
        .map_err(|_| Error::InvalidProbability(p_silent))?
        .sample(rng);
    finish_estimate(silent, runs, diff.mode_count(), alpha_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonic::no_photon_probability;
    use core::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pv(v: &[f64]) -> PhaseFeatureVector {
        PhaseFeatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scaler_fit() {
        let s = fit_scaler(&[vec![3.0, -1.0]]).unwrap();
        assert_eq!(s.min(), s.max());
        assert!(s.is_degenerate(0) && s.is_degenerate(1));
        let s = fit_scaler(&[vec![0.0, 10.0], vec![4.0, 20.0]]).unwrap();
        assert_eq!(s.min(), &[0.0, 10.0]);
        assert_eq!(s.max(), &[4.0, 20.0]);
        assert!(!s.is_degenerate(0));
        assert_eq!(fit_scaler::<Vec<f64>>(&[]), Err(Error::Empty("training features")));
        assert!(fit_scaler(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn phase_mapping() {
        let s = fit_scaler(&[vec![0.0, 10.0, 5.0], vec![4.0, 20.0, 5.0]]).unwrap();
        let p = to_phases(&[0.0, 20.0, 5.0], &s).unwrap();
        assert_eq!(p.as_slice(), &[0.0, FRAC_PI_2, 0.0]);
        let mid = to_phases(&[2.0, 15.0, 5.0], &s).unwrap();
        assert!((mid.as_slice()[0] - FRAC_PI_4).abs() < 1e-15);
        assert!((mid.as_slice()[1] - FRAC_PI_4).abs() < 1e-15);
        let out = to_phases(&[-3.0, 99.0, 7.0], &s).unwrap();
        assert_eq!(out.as_slice(), &[0.0, FRAC_PI_2, 0.0]);
        assert!(to_phases(&[1.0], &s).is_err());
    }

    #[test]
    fn phase_vector_range() {
        assert_eq!(PhaseFeatureVector::new(vec![1.6]), Err(Error::PhaseOutOfRange(1.6)));
        assert_eq!(pv(&[0.3, 0.2, 0.1]).padded_to_power_of_two().as_slice(), &[0.3, 0.2, 0.1, 0.0]);
    }

    #[test]
    fn cdm_examples() {
        let a = [0.2, 1.1, 0.5];
        assert_eq!(cdm_exact(&a, &a).unwrap(), 0.0);
        assert!((cdm_exact(&[FRAC_PI_2; 5], &[0.0; 5]).unwrap() - 5.0).abs() < 1e-15);
        let d = cdm_exact(&[FRAC_PI_3, FRAC_PI_2], &[0.0, 0.0]).unwrap();
        assert!((d - 1.5).abs() < 1e-15);
        assert!(cdm_exact(&[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(&[0.4, 0.4], &[0.4, 0.4]).unwrap(), 0.0);
        assert!((manhattan(&[FRAC_PI_2, 0.0], &[0.0, FRAC_PI_2]).unwrap() - PI).abs() < 1e-15);
        assert!(manhattan(&[0.0], &[]).is_err());
    }

    #[test]
    fn probability_inversion() {
        assert_eq!(cdm_from_probability(1.0, 4, 4.0).unwrap(), 0.0);
        assert!((cdm_from_probability(libm::exp(-3.0), 8, 3.0).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(cdm_from_probability(0.0, 4, 4.0), Err(Error::InvalidProbability(0.0)));
        assert!(cdm_from_probability(1.5, 4, 4.0).is_err());
    }

    #[test]
    fn estimate_of_identical_points_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = pv(&[0.3, 1.0, 0.2, 0.9]);
        for runs in [1, 10, 1000] {
            let e = estimate_cdm(&p, &p, Complex64::new(2.0, 0.0), runs, &NoiseModel::ideal(), &mut rng).unwrap();
            assert_eq!(e.p0_hat, 1.0);
            assert_eq!(e.distance, 0.0);
            assert_eq!(e.std_error, 0.0);
        }
        assert!(estimate_cdm(&p, &p, Complex64::new(2.0, 0.0), 0, &NoiseModel::ideal(), &mut rng).is_err());
    }

    #[test]
    fn estimate_agrees_with_exact_within_three_std_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = pv(&[0.1, 1.4, 0.8, 0.3]);
        let b = pv(&[0.9, 0.2, 0.7, 1.5]);
        let exact = cdm_exact(a.as_slice(), b.as_slice()).unwrap();
        let alpha = Complex64::new(2.0, 0.0);
        let e = estimate_cdm(&a, &b, alpha, 100_000, &NoiseModel::ideal(), &mut rng).unwrap();
        assert!((e.distance - exact).abs() <= 3.0 * e.std_error, "{e:?} vs {exact}");
        let f = estimate_cdm_aggregated(&a, &b, alpha, 100_000, &NoiseModel::ideal(), &mut rng).unwrap();
        assert!((f.distance - exact).abs() <= 3.0 * f.std_error, "{f:?} vs {exact}");
    }

    #[test]
    fn estimator_floor_keeps_log_finite() {
        // every round clicks: p0_hat is clamped to max(e^{-|a|^2}, 1/(2 runs))
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = pv(&[FRAC_PI_2; 4]);
        let b = pv(&[0.0; 4]);
        let alpha = Complex64::new(libm::sqrt(40.0), 0.0);
        let e = estimate_cdm(&a, &b, alpha, 10, &NoiseModel::ideal(), &mut rng).unwrap();
        assert_eq!(e.silent_runs, 0);
        assert_eq!(e.p0_hat, 0.05);
        assert!(e.distance.is_finite());
    }

    #[test]
    fn padding_does_not_change_the_estimate_target() {
        let a = pv(&[0.1, 1.4, 0.8]);
        let b = pv(&[0.9, 0.2, 0.7]);
        let alpha_sq = 3.0;
        let diff = difference_ports(&a, &b, Complex64::new(libm::sqrt(alpha_sq), 0.0), &NoiseModel::ideal()).unwrap();
        assert_eq!(diff.mode_count(), 4);
        let d = cdm_from_probability(no_photon_probability(&diff), 4, alpha_sq).unwrap();
        assert!((d - cdm_exact(a.as_slice(), b.as_slice()).unwrap()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cdm_is_a_bounded_symmetric_dissimilarity(
            pairs in proptest::collection::vec((0.0..=FRAC_PI_2, 0.0..=FRAC_PI_2), 1..32),
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let d = cdm_exact(&a, &b).unwrap();
            prop_assert_eq!(d, cdm_exact(&b, &a).unwrap());
            prop_assert!(d >= 0.0 && d <= a.len() as f64);
            prop_assert_eq!(cdm_exact(&a, &a).unwrap(), 0.0);
            prop_assert!(d <= manhattan(&a, &b).unwrap() + 1e-15);
        }

        #[test]
        fn probability_round_trip(
            pairs in proptest::collection::vec((0.0..=FRAC_PI_2, 0.0..=FRAC_PI_2), 1..=16),
            alpha_sq in 0.5..30.0f64,
        ) {
            let a = pv(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let b = pv(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            let diff = difference_ports(&a, &b, Complex64::new(libm::sqrt(alpha_sq), 0.0), &NoiseModel::ideal()).unwrap();
            let d = cdm_from_probability(no_photon_probability(&diff), diff.mode_count(), alpha_sq).unwrap();
            prop_assert!((d - cdm_exact(a.as_slice(), b.as_slice()).unwrap()).abs() < 1e-12);
        }
    }
}
