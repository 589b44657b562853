//! Gate, photon and register counts for the full circuit.

use alloc::vec::Vec;

use crate::optics::{hadamard_gate, synthesize_walsh_hadamard, GatePlacement, InterferometerLayout};
use crate::{Error, Result};

/// Register contributions to the space complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceComplexity {
    /// `log₂M` for the single photon spread over `M` index modes.
    pub photon_register: u32,
    /// `2·N·log₂N` for the two coherent registers.
    pub coherent_registers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceAudit {
    /// Sizes as requested.
    pub requested: (usize, usize),
    /// Sizes after padding to powers of two; all counts refer to these.
    pub padded: (usize, usize),
    pub beam_splitters: usize,
    pub cross_kerr_gates: usize,
    pub phase_shifters: usize,
    pub photons: usize,
    pub space: SpaceComplexity,
}

fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

fn padded_sizes(training_points: usize, features: usize) -> Result<(usize, usize)> {
    if training_points == 0 {
        return Err(Error::Empty("training set"));
    }
    if features == 0 {
        return Err(Error::Empty("feature set"));
    }
    Ok((training_points.next_power_of_two(), features.next_power_of_two()))
}

/// Counts from the closed-form expressions for `M` training points and `N`
/// features. Non-power-of-two inputs are padded first.
pub fn resource_audit(training_points: usize, features: usize) -> Result<ResourceAudit> {
    let (m, n) = padded_sizes(training_points, features)?;
    Ok(ResourceAudit {
        requested: (training_points, features),
        padded: (m, n),
        beam_splitters: m * log2(m) / 2 + n * log2(n) + n,
        cross_kerr_gates: m * n,
        phase_shifters: n,
        photons: 2 * n + 1,
        space: SpaceComplexity {
            photon_register: log2(m) as u32,
            coherent_registers: 2 * n * log2(n),
        },
    })
}

/// Conditional phase imprinted on feature mode `feature` when the heralding
/// photon occupies index mode `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossKerrGate {
    pub index: usize,
    pub feature: usize,
}

/// Every optical element of the circuit, instantiated for given sizes.
#[derive(Debug, Clone)]
pub struct ProtocolCircuit {
    pub photon_multiport: Option<InterferometerLayout>,
    pub train_multiport: Option<InterferometerLayout>,
    pub test_multiport: Option<InterferometerLayout>,
    /// Balanced splitters pairing train mode `k` (mode `k`) with test mode
    /// `k` (mode `N + k`).
    pub interference: InterferometerLayout,
    pub cross_kerr: Vec<CrossKerrGate>,
    /// Feature mode carrying each test-side phase shifter.
    pub phase_shifters: Vec<usize>,
    pub photons: usize,
}

impl ProtocolCircuit {
    /// A single mode needs no multiport, hence the `Option`s.
    pub fn build(training_points: usize, features: usize) -> Result<Self> {
        let (m, n) = padded_sizes(training_points, features)?;
        let multiport = |modes: usize| -> Result<Option<InterferometerLayout>> {
            if modes < 2 {
                Ok(None)
            } else {
                synthesize_walsh_hadamard(modes).map(Some)
            }
        };
        let h = hadamard_gate();
        let mut interference = InterferometerLayout::new(2 * n)?;
        for k in 0..n {
            interference.push(GatePlacement {
                gate: h.clone(),
                mode_a: k,
                mode_b: n + k,
                layer: 0,
            })?;
        }
        Ok(Self {
            photon_multiport: multiport(m)?,
            train_multiport: multiport(n)?,
            test_multiport: multiport(n)?,
            interference,
            cross_kerr: (0..m)
                .flat_map(|index| (0..n).map(move |feature| CrossKerrGate { index, feature }))
                .collect(),
            phase_shifters: (0..n).collect(),
            // one heralding photon plus two resource states at |alpha|^2 = N
            photons: 2 * n + 1,
        })
    }

    pub fn beam_splitter_count(&self) -> usize {
        [&self.photon_multiport, &self.train_multiport, &self.test_multiport]
            .into_iter()
            .flatten()
            .map(InterferometerLayout::gate_count)
            .sum::<usize>()
            + self.interference.gate_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_examples() {
        let a = resource_audit(4, 4).unwrap();
        assert_eq!(a.beam_splitters, 16);
        assert_eq!(a.cross_kerr_gates, 16);
        assert_eq!(a.phase_shifters, 4);
        assert_eq!(a.photons, 9);
        assert_eq!(a.space, SpaceComplexity { photon_register: 2, coherent_registers: 16 });
        assert_eq!(resource_audit(2, 1).unwrap().photons, 3);
        assert_eq!(resource_audit(2, 2).unwrap().beam_splitters, 5);
    }

    #[test]
    fn audit_pads_odd_sizes() {
        let a = resource_audit(105, 60).unwrap();
        assert_eq!(a.requested, (105, 60));
        assert_eq!(a.padded, (128, 64));
        assert_eq!(a.cross_kerr_gates, 128 * 64);
        assert!(resource_audit(0, 4).is_err());
    }

    #[test]
    fn instantiated_circuit_matches_formulas() {
        for (m, n) in [(1, 1), (2, 2), (4, 4), (8, 2), (150, 4), (64, 64)] {
            let audit = resource_audit(m, n).unwrap();
            let circuit = ProtocolCircuit::build(m, n).unwrap();
            assert_eq!(circuit.beam_splitter_count(), audit.beam_splitters, "({m}, {n})");
            assert_eq!(circuit.cross_kerr.len(), audit.cross_kerr_gates);
            assert_eq!(circuit.phase_shifters.len(), audit.phase_shifters);
            assert_eq!(circuit.photons, audit.photons);
        }
    }
}
