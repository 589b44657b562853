//! Beam splitters, Walsh-Hadamard matrices and the butterfly interferometer
//! that realizes them.
//!
//! Mode indices are 0-based. In a product `A·B` the right factor `B` acts
//! first, and layouts number their layers in that order.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::matrix::UnitaryMatrix;
use crate::{Error, Result};

/// Parameters of a lossless two-mode beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParams {
    /// Mixing angle; transmittance is `cos²γ`.
    pub gamma: f64,
    /// Global phase.
    pub phi_0: f64,
    /// Transmitted phase.
    pub phi_tau: f64,
    /// Reflected phase.
    pub phi_rho: f64,
}

impl BeamSplitterParams {
    pub fn new(gamma: f64, phi_0: f64, phi_tau: f64, phi_rho: f64) -> Result<Self> {
        let p = Self {
            gamma,
            phi_0,
            phi_tau,
            phi_rho,
        };
        p.validate()?;
        Ok(p)
    }

    /// The balanced splitter whose matrix is exactly the real `H₁`.
    ///
    /// Uses `φ₀ = −π/2` to cancel the factor `i` that the `φ₀ = 0` choice
    /// ([`Self::balanced_with_phase`]) leaves on every entry.
    pub const fn balanced() -> Self {
        Self {
            gamma: FRAC_PI_4,
            phi_0: -FRAC_PI_2,
            phi_tau: FRAC_PI_2,
            phi_rho: FRAC_PI_2,
        }
    }

    /// Balanced splitter with `φ₀ = 0`; equals `i·H₁`.
    pub const fn balanced_with_phase() -> Self {
        Self {
            gamma: FRAC_PI_4,
            phi_0: 0.0,
            phi_tau: FRAC_PI_2,
            phi_rho: FRAC_PI_2,
        }
    }

    pub fn transmittance(&self) -> f64 {
        let c = libm::cos(self.gamma);
        c * c
    }

    pub fn reflectance(&self) -> f64 {
        let s = libm::sin(self.gamma);
        s * s
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=FRAC_PI_2).contains(&self.gamma) {
            return Err(Error::AngleOutOfRange(self.gamma));
        }
        for v in [self.phi_0, self.phi_tau, self.phi_rho] {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
        }
        Ok(())
    }
}

/// The 2×2 transfer matrix of a lossless beam splitter.
pub fn bs_unitary(params: &BeamSplitterParams) -> Result<UnitaryMatrix> {
    params.validate()?;
    let (s, c) = libm::sincos(params.gamma);
    let global = Complex64::cis(params.phi_0);
    let t = Complex64::cis(params.phi_tau);
    let r = Complex64::cis(params.phi_rho);
    Ok(UnitaryMatrix::from_raw(
        2,
        vec![
            global * c * t,
            global * s * r,
            -global * s * r.conj(),
            global * c * t.conj(),
        ],
    ))
}

/// The balanced splitter `H₁ = (1/√2)[[1, 1], [1, −1]]`.
pub fn hadamard_gate() -> UnitaryMatrix {
    // the parameters are constants inside the valid range
    bs_unitary(&BeamSplitterParams::balanced()).expect("balanced splitter is valid")
}

/// Largest order `t` for which `2^t × 2^t` entries still fit `usize` indexing.
pub const MAX_WALSH_HADAMARD_ORDER: u32 = usize::BITS / 2 - 1;

/// Recursive Walsh-Hadamard matrix of dimension `2^t`, built by block
/// doubling from `H₀ = [1]`.
pub fn walsh_hadamard_matrix(t: u32) -> Result<UnitaryMatrix> {
    if t > MAX_WALSH_HADAMARD_ORDER {
        return Err(Error::OrderTooLarge(t));
    }
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let mut dim = 1usize;
    let mut cur = vec![1.0_f64];
    for _ in 0..t {
        let next_dim = dim * 2;
        let mut next = vec![0.0; next_dim * next_dim];
        for r in 0..dim {
            for c in 0..dim {
                let v = cur[r * dim + c] * scale;
                next[r * next_dim + c] = v;
                next[r * next_dim + c + dim] = v;
                next[(r + dim) * next_dim + c] = v;
                next[(r + dim) * next_dim + c + dim] = -v;
            }
        }
        cur = next;
        dim = next_dim;
    }
    Ok(UnitaryMatrix::from_raw(
        dim,
        cur.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    ))
}

/// Embeds a 2×2 gate on modes `a` and `b` of a `total`-mode identity.
pub fn embed_two_mode(gate: &UnitaryMatrix, a: usize, b: usize, total: usize) -> Result<UnitaryMatrix> {
    check_gate(gate)?;
    check_pair(a, b, total)?;
    let mut out = UnitaryMatrix::identity(total).entries().to_vec();
    out[a * total + a] = gate.get(0, 0);
    out[a * total + b] = gate.get(0, 1);
    out[b * total + a] = gate.get(1, 0);
    out[b * total + b] = gate.get(1, 1);
    Ok(UnitaryMatrix::from_raw(total, out))
}

fn check_gate(gate: &UnitaryMatrix) -> Result<()> {
    if gate.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: gate.dim(),
        });
    }
    Ok(())
}

fn check_pair(a: usize, b: usize, total: usize) -> Result<()> {
    for index in [a, b] {
        if index >= total {
            return Err(Error::ModeOutOfRange { index, modes: total });
        }
    }
    if a == b {
        return Err(Error::SameMode(a));
    }
    Ok(())
}

/// A two-mode gate placed on a pair of modes at a given layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GatePlacement {
    pub gate: UnitaryMatrix,
    pub mode_a: usize,
    pub mode_b: usize,
    pub layer: usize,
}

/// An ordered cascade of two-mode gates over `mode_count` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerLayout {
    mode_count: usize,
    placements: Vec<GatePlacement>,
}

impl InterferometerLayout {
    pub fn new(mode_count: usize) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::Empty("interferometer modes"));
        }
        Ok(Self {
            mode_count,
            placements: Vec::new(),
        })
    }

    /// Appends a placement. Placements must be pushed in non-decreasing
    /// layer order.
    pub fn push(&mut self, placement: GatePlacement) -> Result<()> {
        check_gate(&placement.gate)?;
        check_pair(placement.mode_a, placement.mode_b, self.mode_count)?;
        if let Some(last) = self.placements.last() {
            if placement.layer < last.layer {
                return Err(Error::InvalidArgument("placements must be pushed in layer order"));
            }
        }
        self.placements.push(placement);
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn placements(&self) -> &[GatePlacement] {
        &self.placements
    }

    pub fn gate_count(&self) -> usize {
        self.placements.len()
    }

    pub fn layer_count(&self) -> usize {
        self.placements.last().map_or(0, |p| p.layer + 1)
    }

    /// Composed transfer matrix, earliest layer applied first.
    pub fn unitary(&self) -> UnitaryMatrix {
        let n = self.mode_count;
        let mut m = UnitaryMatrix::identity(n).entries().to_vec();
        // left-multiplying by a two-mode gate only mixes rows a and b
        for p in &self.placements {
            let (a, b) = (p.mode_a, p.mode_b);
            for c in 0..n {
                let x = m[a * n + c];
                let y = m[b * n + c];
                m[a * n + c] = p.gate.get(0, 0) * x + p.gate.get(0, 1) * y;
                m[b * n + c] = p.gate.get(1, 0) * x + p.gate.get(1, 1) * y;
            }
        }
        UnitaryMatrix::from_raw(n, m)
    }

    /// Propagates input amplitudes through the cascade gate by gate.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.mode_count {
            return Err(Error::DimensionMismatch {
                expected: self.mode_count,
                found: amplitudes.len(),
            });
        }
        let mut v = amplitudes.to_vec();
        for p in &self.placements {
            let (x, y) = (v[p.mode_a], v[p.mode_b]);
            v[p.mode_a] = p.gate.get(0, 0) * x + p.gate.get(0, 1) * y;
            v[p.mode_b] = p.gate.get(1, 0) * x + p.gate.get(1, 1) * y;
        }
        Ok(v)
    }
}

/// Builds the butterfly network of balanced splitters realizing the
/// `T`-mode Walsh-Hadamard transform with `(T/2)·log₂T` gates.
///
/// Layer `s` pairs every mode whose bit `s` is clear with the mode that
/// differs only in that bit.
pub fn synthesize_walsh_hadamard(modes: usize) -> Result<InterferometerLayout> {
    if modes < 2 || !modes.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(modes));
    }
    let stages = modes.trailing_zeros() as usize;
    let h = hadamard_gate();
    let mut layout = InterferometerLayout::new(modes)?;
    for stage in 0..stages {
        let bit = 1usize << stage;
        for a in (0..modes).filter(|i| i & bit == 0) {
            layout.push(GatePlacement {
                gate: h.clone(),
                mode_a: a,
                mode_b: a | bit,
                layer: stage,
            })?;
        }
    }
    Ok(layout)
}

/// Returns `U·amplitudes`.
pub fn apply_unitary(u: &UnitaryMatrix, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
    u.apply(amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::norm;
    use crate::TOLERANCE;
    use core::f64::consts::FRAC_1_SQRT_2;
    use proptest::prelude::*;

    fn real(dim: usize, vals: &[f64]) -> UnitaryMatrix {
        UnitaryMatrix::new(dim, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap()
    }

    fn h1() -> UnitaryMatrix {
        let s = FRAC_1_SQRT_2;
        real(2, &[s, s, s, -s])
    }

    // Sylvester closed form: H[r][c] = (-1)^popcount(r & c) / sqrt(2^t).
    fn sylvester(t: u32) -> UnitaryMatrix {
        let n = 1usize << t;
        let scale = 1.0 / (n as f64).sqrt();
        let vals: Vec<f64> = (0..n * n)
            .map(|i| {
                let (r, c) = (i / n, i % n);
                if (r & c).count_ones() % 2 == 0 { scale } else { -scale }
            })
            .collect();
        real(n, &vals)
    }

    #[test]
    fn balanced_splitter_is_real_hadamard() {
        let u = bs_unitary(&BeamSplitterParams::balanced()).unwrap();
        assert!(u.approx_eq(&h1(), TOLERANCE), "{u:?}");
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = bs_unitary(&BeamSplitterParams::new(0.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(u.approx_eq(&UnitaryMatrix::identity(2), TOLERANCE));
    }

    #[test]
    fn zero_global_phase_gives_i_times_hadamard() {
        let u = bs_unitary(&BeamSplitterParams::balanced_with_phase()).unwrap();
        let ih = UnitaryMatrix::new(
            2,
            h1().entries().iter().map(|z| z * Complex64::i()).collect(),
        )
        .unwrap();
        assert!(u.approx_eq(&ih, TOLERANCE));
        assert!(!u.approx_eq(&h1(), TOLERANCE));
        assert!(u.approx_eq_up_to_phase(&h1(), TOLERANCE));
    }

    #[test]
    fn rejects_angle_out_of_range() {
        assert_eq!(
            BeamSplitterParams::new(-0.1, 0.0, 0.0, 0.0),
            Err(Error::AngleOutOfRange(-0.1))
        );
        let p = BeamSplitterParams {
            gamma: 2.0,
            ..BeamSplitterParams::balanced()
        };
        assert_eq!(bs_unitary(&p), Err(Error::AngleOutOfRange(2.0)));
    }

    #[test]
    fn walsh_hadamard_small_orders() {
        assert!(walsh_hadamard_matrix(0).unwrap().approx_eq(&real(1, &[1.0]), TOLERANCE));
        assert!(walsh_hadamard_matrix(1).unwrap().approx_eq(&h1(), TOLERANCE));
        let h2 = real(
            4,
            &[
                0.5, 0.5, 0.5, 0.5, //
                0.5, -0.5, 0.5, -0.5, //
                0.5, 0.5, -0.5, -0.5, //
                0.5, -0.5, -0.5, 0.5,
            ],
        );
        assert!(walsh_hadamard_matrix(2).unwrap().approx_eq(&h2, TOLERANCE));
    }

    #[test]
    fn walsh_hadamard_matches_sylvester_and_is_involution() {
        for t in 0..=6 {
            let h = walsh_hadamard_matrix(t).unwrap();
            assert!(h.approx_eq(&sylvester(t), TOLERANCE), "t={t}");
            let sq = h.compose(&h).unwrap();
            assert!(sq.approx_eq(&UnitaryMatrix::identity(1 << t), TOLERANCE), "t={t}");
        }
    }

    #[test]
    fn walsh_hadamard_rejects_huge_order() {
        assert_eq!(walsh_hadamard_matrix(64), Err(Error::OrderTooLarge(64)));
    }

    #[test]
    fn embed_cases() {
        assert!(embed_two_mode(&h1(), 0, 1, 2).unwrap().approx_eq(&h1(), TOLERANCE));
        let id = embed_two_mode(&UnitaryMatrix::identity(2), 3, 1, 5).unwrap();
        assert!(id.approx_eq(&UnitaryMatrix::identity(5), TOLERANCE));
        assert_eq!(
            embed_two_mode(&h1(), 0, 4, 4),
            Err(Error::ModeOutOfRange { index: 4, modes: 4 })
        );
        assert_eq!(embed_two_mode(&h1(), 2, 2, 4), Err(Error::SameMode(2)));
    }

    #[test]
    fn cascade_of_embedded_gates_gives_h2() {
        let g = h1();
        let e = |a, b| embed_two_mode(&g, a, b, 4).unwrap();
        let second = e(0, 2).compose(&e(1, 3)).unwrap();
        let first = e(0, 1).compose(&e(2, 3)).unwrap();
        let h2 = second.compose(&first).unwrap();
        assert!(h2.approx_eq(&walsh_hadamard_matrix(2).unwrap(), TOLERANCE));
    }

    #[test]
    fn synthesized_layouts_match_recursive_matrix() {
        for t in 1..=6u32 {
            let modes = 1usize << t;
            let layout = synthesize_walsh_hadamard(modes).unwrap();
            assert_eq!(layout.gate_count(), modes / 2 * t as usize);
            assert_eq!(layout.layer_count(), t as usize);
            let u = layout.unitary();
            assert!(u.approx_eq(&sylvester(t), TOLERANCE), "T={modes}");
            assert!(u.is_unitary(TOLERANCE));
        }
    }

    #[test]
    fn synthesized_four_mode_layout_follows_cascade_order() {
        let layout = synthesize_walsh_hadamard(4).unwrap();
        let pairs: Vec<_> = layout
            .placements()
            .iter()
            .map(|p| (p.layer, p.mode_a, p.mode_b))
            .collect();
        assert_eq!(pairs, vec![(0, 0, 1), (0, 2, 3), (1, 0, 2), (1, 1, 3)]);
    }

    #[test]
    fn synthesize_rejects_non_power_of_two() {
        assert_eq!(synthesize_walsh_hadamard(6).unwrap_err(), Error::NotPowerOfTwo(6));
        assert_eq!(synthesize_walsh_hadamard(1).unwrap_err(), Error::NotPowerOfTwo(1));
    }

    #[test]
    fn layout_rejects_out_of_order_layers() {
        let mut l = InterferometerLayout::new(2).unwrap();
        let p = |layer| GatePlacement { gate: h1(), mode_a: 0, mode_b: 1, layer };
        l.push(p(1)).unwrap();
        assert!(l.push(p(0)).is_err());
    }

    #[test]
    fn apply_examples() {
        let e0 = |n: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[0] = Complex64::new(1.0, 0.0);
            v
        };
        let h2 = walsh_hadamard_matrix(2).unwrap();
        let out = apply_unitary(&h2, &e0(4)).unwrap();
        for z in &out {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < TOLERANCE);
        }
        let twice = apply_unitary(&h1(), &apply_unitary(&h1(), &e0(2)).unwrap()).unwrap();
        assert!((twice[0] - 1.0).norm() < TOLERANCE && twice[1].norm() < TOLERANCE);
        let layout = synthesize_walsh_hadamard(4).unwrap();
        assert!(matches!(layout.apply(&e0(2)), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn beam_splitters_are_unitary(
            gamma in 0.0..=FRAC_PI_2,
            p0 in -10.0..10.0f64,
            pt in -10.0..10.0f64,
            pr in -10.0..10.0f64,
        ) {
            let params = BeamSplitterParams::new(gamma, p0, pt, pr).unwrap();
            prop_assert!((params.transmittance() + params.reflectance() - 1.0).abs() < TOLERANCE);
            prop_assert!(bs_unitary(&params).unwrap().is_unitary(TOLERANCE));
        }

        #[test]
        fn unitaries_preserve_norm(
            t in 1u32..=5,
            seed in proptest::collection::vec(-1.0..1.0f64, 64),
        ) {
            let n = 1usize << t;
            let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(seed[2 * i % 64], seed[(2 * i + 1) % 64])).collect();
            let out = apply_unitary(&walsh_hadamard_matrix(t).unwrap(), &v).unwrap();
            prop_assert!((norm(&out) - norm(&v)).abs() < TOLERANCE);
            let via_layout = synthesize_walsh_hadamard(n).unwrap().apply(&v).unwrap();
            for (a, b) in out.iter().zip(&via_layout) {
                prop_assert!((a - b).norm() < TOLERANCE);
            }
        }
    }
}
