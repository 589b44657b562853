//! Labelled datasets: CSV ingestion and export, feature selection and
//! seeded train/test splitting.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use coherent_knn_core::knn::LabeledPoint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub feature_names: Vec<String>,
    /// `M × N`, row-major.
    pub features: Vec<Vec<f64>>,
    /// Index into `class_set` per row.
    pub labels: Vec<usize>,
    pub class_set: Vec<String>,
    /// Row position in the source this dataset was derived from.
    pub row_ids: Vec<usize>,
}

impl LabeledDataset {
    /// Checks the dataset invariants: at least two rows, a common width, and
    /// labels inside the class set.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_set: Vec<String>,
    ) -> Result<Self> {
        let row_ids = (0..features.len()).collect();
        let ds = Self {
            name: name.into(),
            feature_names,
            features,
            labels,
            class_set,
            row_ids,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if self.features.len() < 2 {
            return Err(BenchError::Data(format!(
                "dataset {} needs at least 2 rows, found {}",
                self.name,
                self.features.len()
            )));
        }
        if self.labels.len() != self.features.len() || self.row_ids.len() != self.features.len() {
            return Err(BenchError::Data("label count differs from row count".into()));
        }
        let width = self.feature_names.len();
        if width == 0 {
            return Err(BenchError::Data("dataset has no feature columns".into()));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != width {
                return Err(BenchError::Data(format!("row {i} has {} features, expected {width}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(BenchError::Data(format!("row {i} has non-finite value {v}")));
            }
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.class_set.len()) {
            return Err(BenchError::Data(format!("label index {l} outside class set")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_set.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn points(&self) -> Vec<LabeledPoint> {
        self.features
            .iter()
            .zip(&self.labels)
            .map(|(f, &l)| LabeledPoint::new(f.clone(), l))
            .collect()
    }

    /// Rows at `indices`, keeping class set and feature names.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_set: self.class_set.clone(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }
}

/// Where the class label lives in a CSV row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    pub label_column: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
            label_column: LabelColumn::Last,
        }
    }
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, &name, path, opts)
}

/// Parses CSV from any reader. `origin` is only used in error messages.
pub fn read_csv<R: Read>(reader: R, name: &str, origin: &Path, opts: &CsvOptions) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let malformed = |line: u64, message: String| BenchError::MalformedRow {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut records = rdr.records();
    let mut header: Option<Vec<String>> = None;
    if opts.has_header {
        match records.next() {
            Some(Ok(rec)) => header = Some(rec.iter().map(str::to_string).collect()),
            Some(Err(e)) => return Err(malformed(e.position().map_or(1, |p| p.line()), e.to_string())),
            None => return Err(BenchError::Data(format!("{}: empty file", origin.display()))),
        }
    }

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;
    let resolve = |width: usize| -> Result<usize> {
        let idx = match &opts.label_column {
            LabelColumn::Last => width.checked_sub(1),
            LabelColumn::Index(i) => Some(*i),
            LabelColumn::Name(n) => {
                let h = header
                    .as_ref()
                    .ok_or_else(|| BenchError::Config(format!("label column {n:?} given by name but file has no header")))?;
                h.iter().position(|c| c == n)
            }
        };
        match idx {
            Some(i) if i < width => Ok(i),
            _ => Err(BenchError::Config(format!("unknown label column {:?}", opts.label_column))),
        }
    };
    if let Some(w) = width {
        label_idx = Some(resolve(w)?);
    }

    let mut raw_labels = Vec::new();
    let mut features = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(malformed(line, format!("expected {w} fields, found {}", rec.len())));
        }
        let li = match label_idx {
            Some(i) => i,
            None => *label_idx.insert(resolve(w)?),
        };
        let mut row = Vec::with_capacity(w - 1);
        for (j, field) in rec.iter().enumerate() {
            if j == li {
                continue;
            }
            if field.is_empty() {
                return Err(malformed(line, format!("missing value in column {j}")));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| malformed(line, format!("non-numeric feature {field:?} in column {j}")))?;
            if !v.is_finite() {
                return Err(malformed(line, format!("non-finite feature {field:?} in column {j}")));
            }
            row.push(v);
        }
        raw_labels.push(rec[li].to_string());
        features.push(row);
    }

    let (Some(w), Some(li)) = (width, label_idx) else {
        return Err(BenchError::Data(format!("{}: no data rows", origin.display())));
    };
    let feature_names = match &header {
        Some(h) => h.iter().enumerate().filter(|(j, _)| *j != li).map(|(_, s)| s.clone()).collect(),
        None => (0..w).filter(|&j| j != li).map(|j| format!("x{j}")).collect(),
    };
    let class_set: Vec<String> = raw_labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = raw_labels
        .iter()
        .map(|l| class_set.binary_search(l).expect("label collected above"))
        .collect();
    LabeledDataset::new(name, feature_names, features, labels, class_set)
}

/// Writes features then the label column, with a header row.
pub fn write_csv<W: Write>(ds: &LabeledDataset, writer: W, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    let out = |e: csv::Error| BenchError::Output(e.to_string());
    let mut header = ds.feature_names.clone();
    header.push("class".into());
    w.write_record(&header).map_err(out)?;
    for (row, &label) in ds.features.iter().zip(&ds.labels) {
        // `{}` on f64 prints the shortest string that parses back exactly
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_set[label].clone());
        w.write_record(&rec).map_err(out)?;
    }
    w.flush().map_err(|e| BenchError::Output(e.to_string()))
}

/// Keeps only the columns at `indices`, in the given order.
pub fn select_features(ds: &LabeledDataset, indices: &[usize]) -> Result<LabeledDataset> {
    if indices.is_empty() {
        return Err(BenchError::Config("feature selection is empty".into()));
    }
    let mut seen = BTreeSet::new();
    for &i in indices {
        if i >= ds.feature_count() {
            return Err(BenchError::Config(format!(
                "feature index {i} out of range for {} features",
                ds.feature_count()
            )));
        }
        if !seen.insert(i) {
            return Err(BenchError::Config(format!("feature index {i} selected twice")));
        }
    }
    Ok(LabeledDataset {
        feature_names: indices.iter().map(|&i| ds.feature_names[i].clone()).collect(),
        features: ds.features.iter().map(|r| indices.iter().map(|&i| r[i]).collect()).collect(),
        ..ds.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            seed: 0,
            stratified: true,
        }
    }
}

/// Seeded train/test split. The train side holds `round(fraction·M)` rows;
/// with stratification each class contributes `floor(fraction·n_c)` rows plus
/// one extra for the classes with the largest remainders. Both sides keep the
/// source row order.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(BenchError::Config(format!("train fraction {f} outside (0, 1)")));
    }
    let m = ds.len();
    let target = (f * m as f64).round() as usize;
    if target == 0 || target == m {
        return Err(BenchError::Config(format!(
            "train fraction {f} leaves an empty side for {m} rows"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_idx: Vec<usize> = if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
        for (i, &l) in ds.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let quotas: Vec<f64> = by_class.iter().map(|c| f * c.len() as f64).collect();
        let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..by_class.len()).collect();
        order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
        let mut missing = target.saturating_sub(take.iter().sum());
        for &c in order.iter().cycle().take(order.len() * 2) {
            if missing == 0 {
                break;
            }
            if take[c] < by_class[c].len() {
                take[c] += 1;
                missing -= 1;
            }
        }
        by_class
            .iter_mut()
            .zip(&take)
            .flat_map(|(members, &n)| {
                members.shuffle(&mut rng);
                members[..n].to_vec()
            })
            .collect()
    } else {
        let mut all: Vec<usize> = (0..m).collect();
        all.shuffle(&mut rng);
        all.truncate(target);
        all
    };
    train_idx.sort_unstable();
    let mut in_train = vec![false; m];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let test_idx: Vec<usize> = (0..m).filter(|&i| !in_train[i]).collect();
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}
