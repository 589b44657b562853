use core::f64::consts::FRAC_PI_2;

use coherent_knn_core::cdm::{cdm_exact, difference_ports, estimate_cdm, estimate_cdm_aggregated, PhaseFeatureVector};
use coherent_knn_core::knn::{evaluate, ExactCdm, LabeledPoint, ProbabilityCdm};
use coherent_knn_core::photonic::{
    encode_phases, no_photon_probability, split_resource_coherent, CoherentAmplitudeVector, NoiseModel,
};
use coherent_knn_core::resources::ProtocolCircuit;
use coherent_knn_core::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pv(v: &[f64]) -> PhaseFeatureVector {
    PhaseFeatureVector::new(v.to_vec()).unwrap()
}

// Push both encoded registers through the instantiated 2N-mode interference
// stage and read the vacuum probability off the difference half.
#[test]
fn circuit_interference_matches_difference_ports() {
    let a = [0.1, 1.2, 0.7, FRAC_PI_2];
    let b = [0.4, 0.0, 0.7, 1.0];
    let alpha = Complex64::new(2.0, 0.0);
    let circuit = ProtocolCircuit::build(8, 4).unwrap();
    let resource = split_resource_coherent(alpha, 4).unwrap();
    let train = encode_phases(&resource, &pv(&a)).unwrap();
    let test = encode_phases(&resource, &pv(&b)).unwrap();
    let joint: Vec<Complex64> = train.amplitudes().iter().chain(test.amplitudes()).copied().collect();
    let out = circuit.interference.apply(&joint).unwrap();
    let diff = CoherentAmplitudeVector::new(out[4..].to_vec()).unwrap();
    let direct = difference_ports(&pv(&a), &pv(&b), alpha, &NoiseModel::ideal()).unwrap();
    assert!((no_photon_probability(&diff) - no_photon_probability(&direct)).abs() < 1e-14);
    assert!((no_photon_probability(&direct) - (-cdm_exact(&a, &b).unwrap()).exp()).abs() < 1e-14);
}

#[test]
fn round_by_round_and_binomial_estimators_agree() {
    let (a, b) = (pv(&[0.2, 1.1, 0.9]), pv(&[1.5, 0.3, 0.9]));
    let alpha = Complex64::new(2.0, 0.0);
    let noise = NoiseModel::new(0.9, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let slow = estimate_cdm(&a, &b, alpha, 200_000, &noise, &mut rng).unwrap();
    let fast = estimate_cdm_aggregated(&a, &b, alpha, 200_000, &noise, &mut rng).unwrap();
    let se = slow.std_error.hypot(fast.std_error);
    assert!((slow.distance - fast.distance).abs() < 4.0 * se, "{slow:?} vs {fast:?}");
}

fn points() -> impl Strategy<Value = Vec<LabeledPoint>> {
    prop::collection::vec((prop::collection::vec(0.0..=FRAC_PI_2, 3), 0usize..3), 4..30)
        .prop_map(|v| v.into_iter().map(|(f, l)| LabeledPoint::new(f, l)).collect())
}

proptest! {
    #[test]
    fn probability_path_reproduces_exact_predictions(train in points(), test in points(), k in 1usize..4) {
        prop_assume!(k <= train.len());
        let exact = evaluate(&train, &test, k, 3, &mut ExactCdm).unwrap();
        let via_p0 = evaluate(&train, &test, k, 3, &mut ProbabilityCdm { alpha_sq: 4.0 }).unwrap();
        let labels = |e: &coherent_knn_core::knn::Evaluation| e.predictions.iter().map(|p| p.predicted_label).collect::<Vec<_>>();
        prop_assert_eq!(labels(&exact), labels(&via_p0));
    }

    #[test]
    fn accuracy_matches_confusion_trace(train in points(), test in points()) {
        let e = evaluate(&train, &test, 1, 3, &mut ExactCdm).unwrap();
        let trace: usize = (0..3).map(|c| e.confusion[c][c]).sum();
        let total: usize = e.confusion.iter().flatten().sum();
        prop_assert_eq!(total, test.len());
        prop_assert!((e.accuracy - trace as f64 / total as f64).abs() < 1e-15);
    }
}
