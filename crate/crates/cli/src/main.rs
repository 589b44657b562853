use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coherent_knn::dataset::{write_csv, CsvOptions, LabelColumn, SplitSpec};
use coherent_knn::experiments::{
    self, CurveKind, CurveParams, DatasetSource, ExperimentConfig, LayoutJson, MetricMode,
};
use coherent_knn::synthetic::{generate_synthetic, SyntheticFamily};
use coherent_knn::{BenchError, Result};
use coherent_knn_core::optics::synthesize_walsh_hadamard;
use coherent_knn_core::photonic::NoiseModel;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "coherent-knn",
    version,
    about = "Coherent-state KNN simulator and benchmark harness",
    after_help = "Bundled datasets are read from $COHERENT_KNN_DATA_DIR when set.\nExit status: 0 success, 2 invalid configuration, 3 bad input data, 4 internal error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a held-out split and report accuracy.
    Classify {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a grid over a two-feature dataset.
    Boundary {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Grid resolution as WIDTHxHEIGHT.
        #[arg(long, default_value = "100x100", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample single-photon statistics of the Walsh-Hadamard multiport.
    ValidateNetwork {
        #[arg(long, default_value_t = 8)]
        modes: usize,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the synthesized beam-splitter layout as JSON to this path.
        #[arg(long)]
        dump_layout: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate analytic curves as x,y,series CSV.
    Curves {
        #[arg(value_enum)]
        kind: CurveKind,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        modes: usize,
        /// Comma-separated series values (meaning depends on the curve).
        #[arg(long, value_delimiter = ',')]
        series: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        alpha_sq: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        delta: f64,
        #[arg(long, default_value_t = 10)]
        max_cutoff: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gate, photon and register counts for M training points and N features.
    Resources {
        #[arg(long = "m")]
        training_points: usize,
        #[arg(long = "n")]
        features: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset as CSV.
    Generate {
        #[arg(long)]
        family: SyntheticFamily,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Bundled benchmark (iris, wine, sonar) or a CSV path.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    dataset: Option<String>,
    /// Synthetic family instead of a file.
    #[arg(long)]
    family: Option<SyntheticFamily>,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Synthetic noise standard deviation (family default otherwise).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = MetricMode::Exact)]
    metric: MetricMode,
    /// Coherent resource |alpha|^2 (defaults to the padded feature count).
    #[arg(long)]
    alpha_sq: Option<f64>,
    /// Detection rounds per distance in sampled mode.
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Channel transmissivity.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Detector efficiency.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0, env = "COHERENT_KNN_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    split_fraction: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    stratified: bool,
    /// Comma-separated zero-based feature columns.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<usize>>,
    /// Label column of a CSV file: "last", an index or a header name.
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let source = match (&self.dataset, self.family) {
            (Some(d), None) => DatasetSource::File(d.clone()),
            (None, Some(family)) => DatasetSource::Synthetic {
                family,
                count: self.count,
                noise_sigma: self.noise,
                seed: self.seed,
            },
            _ => return Err(BenchError::Config("give exactly one of --dataset or --family".into())),
        };
        if !self.delimiter.is_ascii() {
            return Err(BenchError::Config("delimiter must be a single ASCII character".into()));
        }
        Ok(ExperimentConfig {
            source,
            csv: CsvOptions {
                has_header: !self.no_header,
                delimiter: self.delimiter as u8,
                label_column: self.label_column.clone(),
            },
            features: self.features.clone(),
            k: self.k,
            metric: self.metric,
            alpha_sq: self.alpha_sq,
            runs: self.runs,
            noise: NoiseModel::new(self.eta, self.tau)?,
            seed: self.seed,
            split: SplitSpec {
                train_fraction: self.split_fraction,
                seed: self.seed,
                stratified: self.stratified,
            },
        })
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(w)?, parse(h)?))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

// A closed downstream pipe (`| head`) ends output quietly.
fn io_result(r: io::Result<()>) -> Result<()> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(BenchError::Output(e.to_string())),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    io_result(
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(w))
            .and_then(|_| w.flush()),
    )
}

fn write_rows<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    let written = rows
        .iter()
        .try_for_each(|row| w.serialize(row).map_err(io::Error::from))
        .and_then(|_| w.flush());
    io_result(written)
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    row: usize,
    true_label: &'a str,
    predicted_label: &'a str,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify { exp, format, out } => {
            let report = experiments::classify(&exp.config()?)?;
            match format {
                Format::Json => write_json(&report, out.as_deref()),
                Format::Csv => {
                    let rows: Vec<_> = report
                        .predictions
                        .iter()
                        .map(|p| PredictionRow {
                            row: p.row,
                            true_label: &p.true_label,
                            predicted_label: &p.predicted_label,
                        })
                        .collect();
                    write_rows(&rows, out.as_deref())?;
                    eprintln!("accuracy {:.4}", report.accuracy);
                    Ok(())
                }
            }
        }
        Command::Boundary { exp, grid, out } => {
            let cells = experiments::boundary(&exp.config()?, grid.0, grid.1)?;
            write_rows(&cells, out.as_deref())
        }
        Command::ValidateNetwork { modes, runs, seed, dump_layout, out } => {
            let report = experiments::validate_network(modes, runs, seed)?;
            if let Some(path) = dump_layout {
                let layout = synthesize_walsh_hadamard(modes)?;
                write_json(&LayoutJson::from(&layout), Some(&path))?;
            }
            write_json(&report, out.as_deref())
        }
        Command::Curves { kind, points, modes, series, alpha_sq, delta, max_cutoff, out } => {
            let params = CurveParams { points, modes, series, alpha_sq, delta, max_cutoff };
            write_rows(&experiments::curves(kind, &params)?, out.as_deref())
        }
        Command::Resources { training_points, features, out } => {
            write_json(&experiments::resources(training_points, features)?, out.as_deref())
        }
        Command::Generate { family, count, noise, seed, out } => {
            let ds = generate_synthetic(family, count, noise.unwrap_or(family.default_noise()), seed)?;
            write_csv(&ds, sink(out.as_deref())?, b',')
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
