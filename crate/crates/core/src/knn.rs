//! Classical stage: distance table, K-nearest selection and majority vote.
//!
//! Labels are indices into an ordered class set `0..class_count`. Ties are
//! resolved deterministically: equal distances by training index, equal vote
//! counts by whichever class has the nearest member, then by class order.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;

use crate::cdm::{cdm_exact, cdm_from_probability, difference_ports, estimate_cdm_aggregated, manhattan, PhaseFeatureVector};
use crate::photonic::{no_photon_probability, NoiseModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: usize,
}

impl LabeledPoint {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

/// A dissimilarity between two feature vectors.
///
/// Takes `&mut self` so that sampled metrics can advance their random state.
pub trait Metric {
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64>;
}

impl<F> Metric for F
where
    F: FnMut(&[f64], &[f64]) -> Result<f64>,
{
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        self(a, b)
    }
}

/// Closed-form CDM on phase vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactCdm;

impl Metric for ExactCdm {
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        cdm_exact(a, b)
    }
}

/// Manhattan distance on phase vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct Manhattan;

impl Metric for Manhattan {
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        manhattan(a, b)
    }
}

/// CDM recovered from the exact vacuum probability of the simulated
/// difference ports, `−(N/|α|²)·ln P(0)`.
#[derive(Debug, Clone, Copy)]
pub struct ProbabilityCdm {
    pub alpha_sq: f64,
}

impl Metric for ProbabilityCdm {
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        let (a, b) = phase_pair(a, b)?;
        let diff = difference_ports(&a, &b, Complex64::new(libm::sqrt(self.alpha_sq), 0.0), &NoiseModel::ideal())?;
        cdm_from_probability(no_photon_probability(&diff), diff.mode_count(), self.alpha_sq)
    }
}

/// CDM estimated from `runs` simulated detection rounds per pair.
#[derive(Debug, Clone)]
pub struct SampledCdm<R> {
    pub alpha_sq: f64,
    pub runs: u64,
    pub noise: NoiseModel,
    pub rng: R,
}

impl<R: Rng> Metric for SampledCdm<R> {
    fn distance(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        let (a, b) = phase_pair(a, b)?;
        let alpha = Complex64::new(libm::sqrt(self.alpha_sq), 0.0);
        Ok(estimate_cdm_aggregated(&a, &b, alpha, self.runs, &self.noise, &mut self.rng)?.distance)
    }
}

fn phase_pair(a: &[f64], b: &[f64]) -> Result<(PhaseFeatureVector, PhaseFeatureVector)> {
    Ok((PhaseFeatureVector::new(a.to_vec())?, PhaseFeatureVector::new(b.to_vec())?))
}

/// Distance from the test point to one training point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

fn by_distance_then_index(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index))
}

/// One entry per training point, in training order.
pub fn distance_table<M: Metric + ?Sized>(train: &[LabeledPoint], test: &[f64], metric: &mut M) -> Result<Vec<Neighbor>> {
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    train
        .iter()
        .enumerate()
        .map(|(index, p)| {
            Ok(Neighbor {
                index,
                distance: metric.distance(&p.features, test)?,
            })
        })
        .collect()
}

/// The `k` entries with the smallest distance, nearest first.
pub fn k_nearest(table: &[Neighbor], k: usize) -> Result<Vec<Neighbor>> {
    if k == 0 || k > table.len() {
        return Err(Error::KOutOfRange { k, max: table.len() });
    }
    let mut sorted = table.to_vec();
    sorted.sort_by(by_distance_then_index);
    sorted.truncate(k);
    Ok(sorted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub predicted_label: usize,
    /// Training indices of the K neighbours, nearest first.
    pub neighbor_indices: Vec<usize>,
    /// Vote count per class.
    pub votes: Vec<usize>,
    /// Fraction of the K neighbours in each class.
    pub class_weights: Vec<f64>,
}

/// Majority vote over `neighbors` (as returned by [`k_nearest`]).
pub fn majority_vote(neighbors: &[Neighbor], train: &[LabeledPoint], class_count: usize) -> Result<Prediction> {
    if neighbors.is_empty() {
        return Err(Error::Empty("neighbour set"));
    }
    let mut ordered = neighbors.to_vec();
    ordered.sort_by(by_distance_then_index);
    let mut votes = vec![0usize; class_count];
    let mut nearest = vec![usize::MAX; class_count];
    for (rank, n) in ordered.iter().enumerate() {
        let label = train
            .get(n.index)
            .ok_or(Error::ModeOutOfRange {
                index: n.index,
                modes: train.len(),
            })?
            .label;
        if label >= class_count {
            return Err(Error::UnknownLabel {
                label,
                classes: class_count,
            });
        }
        votes[label] += 1;
        nearest[label] = nearest[label].min(rank);
    }
    // highest count, then nearest member, then lowest class index
    let predicted_label = (0..class_count)
        .min_by(|&a, &b| votes[b].cmp(&votes[a]).then(nearest[a].cmp(&nearest[b])).then(a.cmp(&b)))
        .ok_or(Error::Empty("class set"))?;
    let k = ordered.len() as f64;
    Ok(Prediction {
        predicted_label,
        neighbor_indices: ordered.iter().map(|n| n.index).collect(),
        class_weights: votes.iter().map(|&v| v as f64 / k).collect(),
        votes,
    })
}

pub fn classify<M: Metric + ?Sized>(
    train: &[LabeledPoint],
    test: &[f64],
    k: usize,
    class_count: usize,
    metric: &mut M,
) -> Result<Prediction> {
    let table = distance_table(train, test, metric)?;
    majority_vote(&k_nearest(&table, k)?, train, class_count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<Prediction>,
}

pub fn evaluate<M: Metric + ?Sized>(
    train: &[LabeledPoint],
    test: &[LabeledPoint],
    k: usize,
    class_count: usize,
    metric: &mut M,
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let mut confusion = vec![vec![0usize; class_count]; class_count];
    let mut predictions = Vec::with_capacity(test.len());
    let mut correct = 0usize;
    for p in test {
        if p.label >= class_count {
            return Err(Error::UnknownLabel {
                label: p.label,
                classes: class_count,
            });
        }
        let pred = classify(train, &p.features, k, class_count, metric)?;
        confusion[p.label][pred.predicted_label] += 1;
        if pred.predicted_label == p.label {
            correct += 1;
        }
        predictions.push(pred);
    }
    Ok(Evaluation {
        accuracy: correct as f64 / test.len() as f64,
        confusion,
        predictions,
    })
}
