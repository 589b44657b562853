//! Classical representation of the optical states in the circuit.
//!
//! A product of coherent states is fully described by its vector of complex
//! amplitudes, and the heralding photon by its single-photon amplitudes over
//! the index modes. Rather than storing the entangled superposition over all
//! training points, a run heralds one index uniformly and then works with the
//! product coherent state for that index.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::cdm::PhaseFeatureVector;
use crate::optics::{hadamard_gate, synthesize_walsh_hadamard};
use crate::{Error, Result};

/// Coherent amplitude `β_k` for each spatial mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAmplitudeVector {
    amplitudes: Vec<Complex64>,
}

impl CoherentAmplitudeVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if let Some(z) = amplitudes.iter().find(|z| !z.is_finite()) {
            return Err(Error::NonFinite(if z.re.is_finite() { z.im } else { z.re }));
        }
        Ok(Self { amplitudes })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); modes],
        }
    }

    pub fn mode_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Total mean photon number `Σ|β_k|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }
}

/// One photon spread over `M` index modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePhotonRegister {
    amplitudes: Vec<Complex64>,
}

impl SinglePhotonRegister {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn mode_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// Detection probability per output mode.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Samples which output detector clicks.
    pub fn sample_output_mode<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (m, p) in self.probabilities().into_iter().enumerate() {
            acc += p;
            if u < acc {
                return m;
            }
        }
        // rounding left a sliver above the cumulative sum
        self.amplitudes.len() - 1
    }
}

/// Channel loss and detector efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    transmissivity: f64,
    detector_efficiency: f64,
    loss_coefficient: Option<f64>,
    propagation_length: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    /// Lossless channel and perfect detectors.
    pub const fn ideal() -> Self {
        Self {
            transmissivity: 1.0,
            detector_efficiency: 1.0,
            loss_coefficient: None,
            propagation_length: None,
        }
    }

    pub fn new(eta: f64, tau: f64) -> Result<Self> {
        check_unit(eta, "transmissivity must lie in [0, 1]")?;
        check_unit(tau, "detector efficiency must lie in [0, 1]")?;
        Ok(Self {
            transmissivity: eta,
            detector_efficiency: tau,
            loss_coefficient: None,
            propagation_length: None,
        })
    }

    /// Transmissivity from a loss coefficient and propagation length,
    /// `η = e^{−λL}`.
    pub fn from_loss(lambda: f64, length: f64, tau: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidNoise("loss coefficient must be finite and non-negative"));
        }
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::InvalidNoise("propagation length must be finite and non-negative"));
        }
        let mut model = Self::new(libm::exp(-lambda * length), tau)?;
        model.loss_coefficient = Some(lambda);
        model.propagation_length = Some(length);
        Ok(model)
    }

    pub fn eta(&self) -> f64 {
        self.transmissivity
    }

    pub fn tau(&self) -> f64 {
        self.detector_efficiency
    }

    pub fn loss_coefficient(&self) -> Option<f64> {
        self.loss_coefficient
    }

    pub fn propagation_length(&self) -> Option<f64> {
        self.propagation_length
    }
}

fn check_unit(v: f64, msg: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidNoise(msg))
    }
}

/// Bucket-detector readout of the difference ports for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionOutcome {
    pub clicks: Vec<bool>,
    pub heralded_index: usize,
}

impl DetectionOutcome {
    /// No detector fired: the run projected onto the vacuum.
    pub fn all_silent(&self) -> bool {
        self.clicks.iter().all(|c| !c)
    }
}

fn require_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Output of the `M`-mode Walsh-Hadamard multiport with a single photon
/// injected at `input_port`.
pub fn distribute_single_photon(modes: usize, input_port: usize) -> Result<SinglePhotonRegister> {
    require_power_of_two(modes)?;
    if input_port >= modes {
        return Err(Error::ModeOutOfRange {
            index: input_port,
            modes,
        });
    }
    let mut input = vec![Complex64::new(0.0, 0.0); modes];
    input[input_port] = Complex64::new(1.0, 0.0);
    let amplitudes = if modes == 1 {
        input
    } else {
        synthesize_walsh_hadamard(modes)?.apply(&input)?
    };
    Ok(SinglePhotonRegister { amplitudes })
}

/// Splits a resource coherent state `|α⟩` fed into the first port of an
/// `N`-mode Walsh-Hadamard multiport into `N` modes of amplitude `α/√N`.
pub fn split_resource_coherent(alpha: Complex64, modes: usize) -> Result<CoherentAmplitudeVector> {
    require_power_of_two(modes)?;
    let mut input = vec![Complex64::new(0.0, 0.0); modes];
    input[0] = alpha;
    let amplitudes = if modes == 1 {
        input
    } else {
        synthesize_walsh_hadamard(modes)?.apply(&input)?
    };
    CoherentAmplitudeVector::new(amplitudes)
}

/// Imprints `e^{iθ_k}` on mode `k`.
pub fn encode_phases(state: &CoherentAmplitudeVector, phases: &PhaseFeatureVector) -> Result<CoherentAmplitudeVector> {
    if phases.len() != state.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: state.mode_count(),
            found: phases.len(),
        });
    }
    Ok(CoherentAmplitudeVector {
        amplitudes: state
            .amplitudes
            .iter()
            .zip(phases.as_slice())
            .map(|(b, &theta)| b * Complex64::cis(theta))
            .collect(),
    })
}

/// Mixes train mode `k` with test mode `k` on a balanced splitter for every
/// `k`, returning `(sum ports, difference ports)`.
pub fn interfere_pairs(
    train: &CoherentAmplitudeVector,
    test: &CoherentAmplitudeVector,
) -> Result<(CoherentAmplitudeVector, CoherentAmplitudeVector)> {
    if train.mode_count() != test.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: train.mode_count(),
            found: test.mode_count(),
        });
    }
    let h = hadamard_gate();
    let (sum, diff) = train
        .amplitudes
        .iter()
        .zip(&test.amplitudes)
        .map(|(&a, &b)| (h.get(0, 0) * a + h.get(0, 1) * b, h.get(1, 0) * a + h.get(1, 1) * b))
        .unzip();
    Ok((
        CoherentAmplitudeVector { amplitudes: sum },
        CoherentAmplitudeVector { amplitudes: diff },
    ))
}

/// Probability that every mode is found empty, `exp(−Σ|β_k|²)`.
pub fn no_photon_probability(ports: &CoherentAmplitudeVector) -> f64 {
    libm::exp(-ports.mean_photon_number())
}

/// Amplitude damping through a channel of transmissivity `η`.
pub fn apply_loss(state: &CoherentAmplitudeVector, noise: &NoiseModel) -> CoherentAmplitudeVector {
    let s = libm::sqrt(noise.eta());
    CoherentAmplitudeVector {
        amplitudes: state.amplitudes.iter().map(|b| b * s).collect(),
    }
}

/// Overlap `|⟨β|√η β⟩|²` between a coherent state and its damped copy.
pub fn transmission_fidelity(beta_mod_sq: f64, eta: f64) -> f64 {
    let d = 1.0 - libm::sqrt(eta);
    libm::exp(-beta_mod_sq * d * d)
}

/// Probability that a bucket detector of efficiency `τ` stays silent on a
/// coherent state of amplitude `β`: `Σ_n Poisson(n; |β|²)(1−τ)^n = e^{−τ|β|²}`.
pub fn no_click_probability(beta: Complex64, tau: f64) -> f64 {
    libm::exp(-tau * beta.norm_sqr())
}

/// Samples one run of bucket detection on the difference ports.
pub fn sample_detection<R: Rng + ?Sized>(
    diff_ports: &CoherentAmplitudeVector,
    noise: &NoiseModel,
    heralded_index: usize,
    rng: &mut R,
) -> DetectionOutcome {
    let clicks = diff_ports
        .amplitudes
        .iter()
        .map(|&b| {
            let silent = no_click_probability(b, noise.tau());
            rng.random::<f64>() >= silent
        })
        .collect();
    DetectionOutcome {
        clicks,
        heralded_index,
    }
}

/// Mean photon number per difference port, `μ = (|α|²/N)(1 − cos Δ)`.
fn port_photon_number(alpha_sq: f64, modes: usize, delta: f64) -> f64 {
    alpha_sq / modes as f64 * (1.0 - libm::cos(delta))
}

/// Probability that an inefficient detector misses photons that are
/// present, truncated at Fock state `cutoff`:
/// `Σ_{n=1}^{cutoff} e^{−μ} μⁿ/n! (1−τ)ⁿ`.
pub fn detector_error_probability(alpha_sq: f64, modes: usize, delta: f64, tau: f64, cutoff: u32) -> Result<f64> {
    if modes == 0 {
        return Err(Error::Empty("feature modes"));
    }
    let mu = port_photon_number(alpha_sq, modes, delta);
    let miss = 1.0 - tau;
    let mut term = libm::exp(-mu);
    let mut total = 0.0;
    for n in 1..=cutoff {
        term *= mu * miss / f64::from(n);
        total += term;
    }
    Ok(total)
}

/// The `cutoff → ∞` limit of [`detector_error_probability`], `e^{−τμ} − e^{−μ}`.
pub fn detector_error_limit(alpha_sq: f64, modes: usize, delta: f64, tau: f64) -> Result<f64> {
    if modes == 0 {
        return Err(Error::Empty("feature modes"));
    }
    let mu = port_photon_number(alpha_sq, modes, delta);
    Ok(libm::exp(-tau * mu) - libm::exp(-mu))
}

/// Which training point a run encoded, uniform over `0..M`.
pub fn herald_training_index<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<usize> {
    if modes == 0 {
        return Err(Error::Empty("training set"));
    }
    Ok(rng.random_range(0..modes))
}
