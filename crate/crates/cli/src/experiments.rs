//! Experiment drivers behind the CLI subcommands. Each returns a plain
//! serializable report; formatting and IO live in `main.rs` and `output`.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use coherent_knn_core::cdm::{fit_scaler, to_phases, ScalerParams};
use coherent_knn_core::knn::{evaluate, ExactCdm, LabeledPoint, Manhattan, Metric, ProbabilityCdm, SampledCdm};
use coherent_knn_core::optics::{synthesize_walsh_hadamard, InterferometerLayout};
use coherent_knn_core::photonic::{
    detector_error_limit, detector_error_probability, distribute_single_photon, transmission_fidelity, NoiseModel,
};
use coherent_knn_core::resources::{resource_audit, ProtocolCircuit, ResourceAudit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{load_csv, select_features, split, CsvOptions, LabeledDataset, SplitSpec};
use crate::error::{BenchError, Result};
use crate::synthetic::{generate_synthetic, SyntheticFamily};

/// Environment variable overriding the directory searched for named datasets.
pub const DATA_DIR_ENV: &str = "COHERENT_KNN_DATA_DIR";

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Closed-form CDM.
    Exact,
    /// CDM recovered from the exact vacuum probability of the simulated ports.
    RoundTrip,
    /// CDM estimated from simulated detection rounds.
    Sampled,
    /// Manhattan distance on the phases.
    Manhattan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// A bundled benchmark (`iris`, `wine`, `sonar`) or a CSV path.
    File(String),
    Synthetic {
        family: SyntheticFamily,
        count: usize,
        noise_sigma: Option<f64>,
        seed: u64,
    },
}

/// Defaults attached to each bundled benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub file: &'static str,
    pub k: usize,
    pub features: Option<Vec<usize>>,
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "iris" => Some(Preset { file: "iris.csv", k: 3, features: None }),
        // the 10-feature configuration uses the first ten columns
        "wine" => Some(Preset { file: "wine.csv", k: 20, features: Some((0..10).collect()) }),
        "sonar" => Some(Preset { file: "sonar.csv", k: 5, features: None }),
        _ => None,
    }
}

pub const SYNTHETIC_K: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetMeta {
    pub name: String,
    pub source: String,
    pub rows: usize,
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub feature_indices: Option<Vec<usize>>,
    pub synthetic_seed: Option<u64>,
    pub noise_sigma: Option<f64>,
}

/// Loads a dataset and applies the feature selection (explicit, else the
/// preset's). Returns the preset's K when there is one.
pub fn load_dataset(
    source: &DatasetSource,
    features: Option<&[usize]>,
    csv: &CsvOptions,
) -> Result<(LabeledDataset, DatasetMeta, Option<usize>)> {
    let (ds, origin, default_k, default_features, syn_seed, noise) = match source {
        DatasetSource::File(spec) => {
            let lower = spec.to_ascii_lowercase();
            match preset(&lower) {
                Some(p) => {
                    let path = data_dir().join(p.file);
                    let mut ds = load_csv(&path, &CsvOptions::default())?;
                    ds.name = lower;
                    (ds, path.display().to_string(), Some(p.k), p.features, None, None)
                }
                None => {
                    let path = PathBuf::from(spec);
                    if !path.exists() {
                        return Err(BenchError::Config(format!(
                            "dataset {spec:?} is neither a bundled benchmark (iris, wine, sonar) nor an existing file"
                        )));
                    }
                    (load_csv(&path, csv)?, path.display().to_string(), None, None, None, None)
                }
            }
        }
        DatasetSource::Synthetic { family, count, noise_sigma, seed } => {
            let sigma = noise_sigma.unwrap_or(family.default_noise());
            let ds = generate_synthetic(*family, *count, sigma, *seed)?;
            (ds, format!("synthetic:{family}"), Some(SYNTHETIC_K), None, Some(*seed), Some(sigma))
        }
    };
    let chosen = features.map(<[usize]>::to_vec).or(default_features);
    let ds = match &chosen {
        Some(idx) => select_features(&ds, idx)?,
        None => ds,
    };
    let meta = DatasetMeta {
        name: ds.name.clone(),
        source: origin,
        rows: ds.len(),
        classes: ds.class_set.clone(),
        features: ds.feature_names.clone(),
        feature_indices: chosen,
        synthetic_seed: syn_seed,
        noise_sigma: noise,
    };
    Ok((ds, meta, default_k))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: DatasetSource,
    pub csv: CsvOptions,
    pub features: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub metric: MetricMode,
    /// Defaults to the padded feature-mode count.
    pub alpha_sq: Option<f64>,
    pub runs: u64,
    pub noise: NoiseModel,
    pub seed: u64,
    pub split: SplitSpec,
}

impl ExperimentConfig {
    pub fn new(source: DatasetSource) -> Self {
        Self {
            source,
            csv: CsvOptions::default(),
            features: None,
            k: None,
            metric: MetricMode::Exact,
            alpha_sq: None,
            runs: 10_000,
            noise: NoiseModel::ideal(),
            seed: 0,
            split: SplitSpec::default(),
        }
    }
}

/// Train/test data mapped to phases with a scaler fit on the training rows.
#[derive(Debug, Clone)]
pub struct PhaseData {
    pub dataset: LabeledDataset,
    pub meta: DatasetMeta,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub scaler: ScalerParams,
    pub train_points: Vec<LabeledPoint>,
    pub test_points: Vec<LabeledPoint>,
    pub k: usize,
    /// Feature modes after padding to a power of two.
    pub modes: usize,
    pub alpha_sq: f64,
}

fn phase_points(ds: &LabeledDataset, scaler: &ScalerParams) -> Result<Vec<LabeledPoint>> {
    ds.features
        .iter()
        .zip(&ds.labels)
        .map(|(x, &l)| Ok(LabeledPoint::new(to_phases(x, scaler)?.into_inner(), l)))
        .collect()
}

pub fn prepare(config: &ExperimentConfig) -> Result<PhaseData> {
    let (dataset, meta, preset_k) = load_dataset(&config.source, config.features.as_deref(), &config.csv)?;
    let (train, test) = split(&dataset, &config.split)?;
    let scaler = fit_scaler(&train.features)?;
    let train_points = phase_points(&train, &scaler)?;
    let test_points = phase_points(&test, &scaler)?;
    let k = config
        .k
        .or(preset_k)
        .ok_or_else(|| BenchError::Config("--k is required for this dataset".into()))?;
    let modes = dataset.feature_count().next_power_of_two();
    let alpha_sq = config.alpha_sq.unwrap_or(modes as f64);
    if !(alpha_sq > 0.0 && alpha_sq.is_finite()) {
        return Err(BenchError::Config(format!("--alpha-sq must be positive, got {alpha_sq}")));
    }
    Ok(PhaseData {
        dataset,
        meta,
        train,
        test,
        scaler,
        train_points,
        test_points,
        k,
        modes,
        alpha_sq,
    })
}

/// Seed for the detection sampler, kept apart from the split seed.
fn sampler_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_0fd3_7ec7
}

/// The configured metric as a trait object.
pub fn build_metric(config: &ExperimentConfig, alpha_sq: f64) -> Result<Box<dyn Metric>> {
    Ok(match config.metric {
        MetricMode::Exact => Box::new(ExactCdm),
        MetricMode::Manhattan => Box::new(Manhattan),
        MetricMode::RoundTrip => Box::new(ProbabilityCdm { alpha_sq }),
        MetricMode::Sampled => {
            if config.runs == 0 {
                return Err(BenchError::Config("--runs must be at least 1".into()));
            }
            Box::new(SampledCdm {
                alpha_sq,
                runs: config.runs,
                noise: config.noise,
                rng: ChaCha8Rng::seed_from_u64(sampler_seed(config.seed)),
            })
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointPrediction {
    pub row: usize,
    pub true_label: String,
    pub predicted_label: String,
    pub neighbors: Vec<usize>,
    pub class_weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitMeta {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub dataset: DatasetMeta,
    pub split: SplitMeta,
    pub k: usize,
    pub metric: MetricMode,
    pub alpha_sq: f64,
    pub feature_modes: usize,
    pub runs: Option<u64>,
    pub eta: f64,
    pub tau: f64,
    pub seed: u64,
    pub accuracy: f64,
    /// `confusion[true][predicted]`, indexed like `dataset.classes`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<PointPrediction>,
    pub resources: ResourceReport,
}

pub fn classify(config: &ExperimentConfig) -> Result<ClassifyReport> {
    let data = prepare(config)?;
    classify_prepared(config, &data)
}

pub fn classify_prepared(config: &ExperimentConfig, data: &PhaseData) -> Result<ClassifyReport> {
    let mut metric = build_metric(config, data.alpha_sq)?;
    let ev = evaluate(
        &data.train_points,
        &data.test_points,
        data.k,
        data.dataset.class_count(),
        metric.as_mut(),
    )?;
    let classes = &data.dataset.class_set;
    let predictions = ev
        .predictions
        .iter()
        .zip(&data.test.labels)
        .zip(&data.test.row_ids)
        .map(|((p, &truth), &row)| PointPrediction {
            row,
            true_label: classes[truth].clone(),
            predicted_label: classes[p.predicted_label].clone(),
            neighbors: p.neighbor_indices.iter().map(|&i| data.train.row_ids[i]).collect(),
            class_weights: p.class_weights.clone(),
        })
        .collect();
    let sampled = config.metric == MetricMode::Sampled;
    Ok(ClassifyReport {
        dataset: data.meta.clone(),
        split: SplitMeta {
            train_fraction: config.split.train_fraction,
            stratified: config.split.stratified,
            seed: config.split.seed,
            train_rows: data.train.len(),
            test_rows: data.test.len(),
        },
        k: data.k,
        metric: config.metric,
        alpha_sq: data.alpha_sq,
        feature_modes: data.modes,
        runs: sampled.then_some(config.runs),
        eta: config.noise.eta(),
        tau: config.noise.tau(),
        seed: config.seed,
        accuracy: ev.accuracy,
        confusion: ev.confusion,
        predictions,
        resources: resources(data.train.len(), data.dataset.feature_count())?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCell {
    pub kind: &'static str,
    pub feature1: f64,
    pub feature2: f64,
    pub class: String,
}

/// Classifies every cell centre of a `width × height` grid spanning the
/// feature ranges plus a 10% margin, followed by the test points with their
/// true labels.
pub fn boundary(config: &ExperimentConfig, width: usize, height: usize) -> Result<Vec<BoundaryCell>> {
    let data = prepare(config)?;
    if data.dataset.feature_count() != 2 {
        return Err(BenchError::Config(format!(
            "decision boundaries need exactly 2 features, dataset has {}",
            data.dataset.feature_count()
        )));
    }
    if width == 0 || height == 0 {
        return Err(BenchError::Config("grid dimensions must be positive".into()));
    }
    let range = |j: usize| {
        let (lo, hi) = data
            .dataset
            .features
            .iter()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let pad = 0.1 * (hi - lo);
        (lo - pad, hi + pad)
    };
    let ((x0, x1), (y0, y1)) = (range(0), range(1));
    let mut metric = build_metric(config, data.alpha_sq)?;
    let classes = &data.dataset.class_set;
    let mut cells = Vec::with_capacity(width * height + data.test.len());
    for iy in 0..height {
        let y = y0 + (y1 - y0) * (iy as f64 + 0.5) / height as f64;
        for ix in 0..width {
            let x = x0 + (x1 - x0) * (ix as f64 + 0.5) / width as f64;
            let phases = to_phases(&[x, y], &data.scaler)?;
            let p = coherent_knn_core::knn::classify(
                &data.train_points,
                phases.as_slice(),
                data.k,
                classes.len(),
                metric.as_mut(),
            )?;
            cells.push(BoundaryCell {
                kind: "grid",
                feature1: x,
                feature2: y,
                class: classes[p.predicted_label].clone(),
            });
        }
    }
    for (row, &label) in data.test.features.iter().zip(&data.test.labels) {
        cells.push(BoundaryCell {
            kind: "test",
            feature1: row[0],
            feature2: row[1],
            class: classes[label].clone(),
        });
    }
    Ok(cells)
}

#[derive(Debug, Clone, Serialize)]
pub struct PortReport {
    pub input_port: usize,
    pub probabilities: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub chi_square: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkReport {
    pub modes: usize,
    pub runs: u64,
    pub seed: u64,
    pub beam_splitters: usize,
    /// Three binomial standard errors of a uniform output frequency.
    pub tolerance: f64,
    pub ports: Vec<PortReport>,
}

/// Injects a single photon into each input port of the `M`-mode
/// Walsh-Hadamard multiport in turn and histograms the output detector over
/// `runs` shots.
pub fn validate_network(modes: usize, runs: u64, seed: u64) -> Result<NetworkReport> {
    if modes < 2 || !modes.is_power_of_two() {
        return Err(BenchError::Config(format!("network size must be a power of two >= 2, got {modes}")));
    }
    if runs == 0 {
        return Err(BenchError::Config("--runs must be at least 1".into()));
    }
    let layout = synthesize_walsh_hadamard(modes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = 1.0 / modes as f64;
    let mut ports = Vec::with_capacity(modes);
    for port in 0..modes {
        let register = distribute_single_photon(modes, port)?;
        let mut counts = vec![0u64; modes];
        for _ in 0..runs {
            counts[register.sample_output_mode(&mut rng)] += 1;
        }
        let expected = runs as f64 * uniform;
        let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
        ports.push(PortReport {
            input_port: port,
            probabilities: register.probabilities(),
            chi_square: counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum(),
            max_deviation: frequencies.iter().map(|f| (f - uniform).abs()).fold(0.0, f64::max),
            frequencies,
        });
    }
    Ok(NetworkReport {
        modes,
        runs,
        seed,
        beam_splitters: layout.gate_count(),
        tolerance: 3.0 * (uniform * (1.0 - uniform) / runs as f64).sqrt(),
        ports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LayoutPlacementJson {
    pub layer: usize,
    pub mode_a: usize,
    pub mode_b: usize,
    /// Row-major 2×2 gate as `[re, im]` pairs.
    pub gate: [[f64; 2]; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct LayoutJson {
    pub mode_count: usize,
    pub placements: Vec<LayoutPlacementJson>,
}

impl From<&InterferometerLayout> for LayoutJson {
    fn from(layout: &InterferometerLayout) -> Self {
        Self {
            mode_count: layout.mode_count(),
            placements: layout
                .placements()
                .iter()
                .map(|p| {
                    let e = p.gate.entries();
                    LayoutPlacementJson {
                        layer: p.layer,
                        mode_a: p.mode_a,
                        mode_b: p.mode_b,
                        gate: [[e[0].re, e[0].im], [e[1].re, e[1].im], [e[2].re, e[2].im], [e[3].re, e[3].im]],
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CurveKind {
    /// Vacuum probability against distance for several |alpha|^2.
    P0VsDistance,
    /// Per-feature CDM term against the Manhattan term.
    CdmVsManhattan,
    /// Fidelity of a damped coherent state against transmissivity.
    FidelityVsEta,
    /// Missed-photon probability against the Fock cutoff.
    DetectorError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams {
    pub points: usize,
    /// Feature modes N for the distance and detector curves.
    pub modes: usize,
    /// `|alpha|^2` per series for `P0VsDistance`, `|beta|^2` per series for
    /// `FidelityVsEta`, detector efficiency per series for `DetectorError`.
    pub series: Option<Vec<f64>>,
    pub alpha_sq: f64,
    pub delta: f64,
    pub max_cutoff: u32,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self {
            points: 101,
            modes: 2,
            series: None,
            alpha_sq: 1.0,
            delta: FRAC_PI_2,
            max_cutoff: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| {
        if points == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        }
    })
}

pub fn curves(kind: CurveKind, params: &CurveParams) -> Result<Vec<CurveRow>> {
    if params.points == 0 {
        return Err(BenchError::Config("curve needs at least one point".into()));
    }
    if params.modes == 0 {
        return Err(BenchError::Config("curve needs at least one feature mode".into()));
    }
    let series = |default: &[f64]| params.series.clone().unwrap_or_else(|| default.to_vec());
    let mut rows = Vec::new();
    match kind {
        CurveKind::P0VsDistance => {
            let n = params.modes as f64;
            for a in series(&[0.5 * n, n, 2.0 * n, 4.0 * n]) {
                for d in grid(0.0, n, params.points) {
                    rows.push(CurveRow { x: d, y: (-(a / n) * d).exp(), series: format!("alpha_sq={a}") });
                }
            }
        }
        CurveKind::CdmVsManhattan => {
            for delta in grid(0.0, FRAC_PI_2, params.points) {
                rows.push(CurveRow { x: delta, y: 1.0 - delta.cos(), series: "cdm".into() });
                rows.push(CurveRow { x: delta, y: delta, series: "manhattan".into() });
            }
        }
        CurveKind::FidelityVsEta => {
            for b in series(&[0.5, 1.0, 2.0, 4.0, 8.0]) {
                for eta in grid(0.0, 1.0, params.points) {
                    rows.push(CurveRow { x: eta, y: transmission_fidelity(b, eta), series: format!("beta_sq={b}") });
                }
            }
        }
        CurveKind::DetectorError => {
            for tau in series(&[0.5, 0.7, 0.9]) {
                if !(0.0..=1.0).contains(&tau) {
                    return Err(BenchError::Config(format!("detector efficiency {tau} outside [0, 1]")));
                }
                for cutoff in 1..=params.max_cutoff {
                    rows.push(CurveRow {
                        x: f64::from(cutoff),
                        y: detector_error_probability(params.alpha_sq, params.modes, params.delta, tau, cutoff)?,
                        series: format!("tau={tau}"),
                    });
                }
                rows.push(CurveRow {
                    x: f64::INFINITY,
                    y: detector_error_limit(params.alpha_sq, params.modes, params.delta, tau)?,
                    series: format!("tau={tau}"),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceReport {
    pub photon_register: u32,
    pub coherent_registers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstantiatedCounts {
    pub beam_splitters: usize,
    pub cross_kerr_gates: usize,
    pub phase_shifters: usize,
    pub photons: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub requested_m: usize,
    pub requested_n: usize,
    pub padded_m: usize,
    pub padded_n: usize,
    pub beam_splitters: usize,
    pub cross_kerr_gates: usize,
    pub phase_shifters: usize,
    pub photons: usize,
    pub space_complexity: SpaceReport,
    pub instantiated: InstantiatedCounts,
}

impl ResourceReport {
    pub fn consistent(&self) -> bool {
        self.instantiated.beam_splitters == self.beam_splitters
            && self.instantiated.cross_kerr_gates == self.cross_kerr_gates
            && self.instantiated.phase_shifters == self.phase_shifters
            && self.instantiated.photons == self.photons
    }
}

/// Formula counts for `M` training points and `N` features, alongside the
/// counts of the elements actually instantiated for the same sizes.
pub fn resources(training_points: usize, features: usize) -> Result<ResourceReport> {
    let audit: ResourceAudit = resource_audit(training_points, features)?;
    let circuit = ProtocolCircuit::build(training_points, features)?;
    Ok(ResourceReport {
        requested_m: audit.requested.0,
        requested_n: audit.requested.1,
        padded_m: audit.padded.0,
        padded_n: audit.padded.1,
        beam_splitters: audit.beam_splitters,
        cross_kerr_gates: audit.cross_kerr_gates,
        phase_shifters: audit.phase_shifters,
        photons: audit.photons,
        space_complexity: SpaceReport {
            photon_register: audit.space.photon_register,
            coherent_registers: audit.space.coherent_registers,
        },
        instantiated: InstantiatedCounts {
            beam_splitters: circuit.beam_splitter_count(),
            cross_kerr_gates: circuit.cross_kerr.len(),
            phase_shifters: circuit.phase_shifters.len(),
            photons: circuit.photons,
        },
    })
}
