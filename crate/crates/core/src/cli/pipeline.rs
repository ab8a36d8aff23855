//! Stage functions behind the subcommands, independent of argument parsing and files.

use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;

use crate::format::fmt_f64;
use crate::knn::{
    classify_batch, FeatureVector, KnnConfig, KnnError, LabeledDataset, ScalingMode, ScalingSpec,
};
use crate::metrics::{confusion, rates, ConfusionMatrix, Rate, Rates};
use crate::signal_io::{Annotation, ClassLabel, Recording};
use crate::tls_model::{fit_mle, FitConfig};
use crate::windowing::{label_segment, segment_channel, WindowSpec};

use super::tables::{FeatureRow, FeatureTable, PredictionRow};
use super::CliError;

/// Fixed-length tiling, or one segment per channel covering the whole recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    Samples(WindowSpec),
    WholeEpoch,
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub window: WindowMode,
    pub overlap_threshold: f64,
    pub fit: FitConfig,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            window: WindowMode::Samples(WindowSpec::default()),
            overlap_threshold: crate::windowing::DEFAULT_OVERLAP_THRESHOLD,
            fit: FitConfig::default(),
        }
    }
}

/// One recording to extract from, with its identifier and optional annotations.
#[derive(Debug, Clone)]
pub struct ExtractInput {
    pub id: String,
    pub recording: Recording,
    pub annotations: Option<Vec<Annotation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractStats {
    pub segments: usize,
    pub failed: usize,
}

struct Job<'a> {
    input: &'a ExtractInput,
    channel: String,
    start_index: usize,
    samples: Vec<f64>,
    label: Option<ClassLabel>,
}

/// Fits every segment of every channel of every input.
///
/// Fits run in parallel; the output order is input order, then channel order,
/// then time. Failed fits are logged and left out of the table.
pub fn extract_features(
    inputs: &[ExtractInput],
    options: &ExtractOptions,
) -> Result<(FeatureTable, ExtractStats), CliError> {
    let mut jobs = Vec::new();
    for input in inputs {
        let rec = &input.recording;
        if let Some(anns) = &input.annotations {
            if let Some(bad) = anns.iter().find(|a| !a.fits(rec)) {
                return Err(CliError::Input(format!(
                    "{}: annotation {} @ {} s (+{} s) does not fit the recording",
                    input.id, bad.channel, bad.onset_s, bad.duration_s
                )));
            }
        }
        let spec = match options.window {
            WindowMode::Samples(spec) => spec,
            WindowMode::WholeEpoch => WindowSpec::new(rec.num_samples())?,
        };
        for channel in rec.channels() {
            for segment in segment_channel(rec, channel, spec)? {
                let label = input.annotations.as_ref().map(|anns| {
                    label_segment(&segment, anns, rec.sample_rate_hz(), options.overlap_threshold)
                });
                jobs.push(Job {
                    input,
                    channel: channel.to_string(),
                    start_index: segment.start_index,
                    samples: segment.samples,
                    label,
                });
            }
        }
    }

    let fitted: Vec<Option<FeatureRow>> = jobs
        .par_iter()
        .map(|job| match fit_mle(&job.samples, &options.fit) {
            Ok(report) => Some(FeatureRow {
                recording: job.input.id.clone(),
                channel: job.channel.clone(),
                start_index: job.start_index,
                mu: report.params.mu,
                sigma: report.params.sigma,
                nu: report.params.nu,
                label: job.label,
            }),
            Err(e) => {
                warn!(
                    "{} {} @ {}: fit failed: {e}",
                    job.input.id, job.channel, job.start_index
                );
                None
            }
        })
        .collect();

    let stats = ExtractStats {
        segments: fitted.len(),
        failed: fitted.iter().filter(|r| r.is_none()).count(),
    };
    let rows: Vec<FeatureRow> = fitted.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(CliError::AllFitsFailed(stats.segments));
    }
    Ok((FeatureTable { rows }, stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub dataset: LabeledDataset,
    pub scaling: ScalingSpec,
    pub config: KnnConfig,
}

pub fn train(table: &FeatureTable, k: usize, scaling: ScalingMode) -> Result<TrainedModel, CliError> {
    if !table.is_labeled() {
        return Err(CliError::Input("training table must be labeled on every row".into()));
    }
    let features: Vec<FeatureVector> = table.rows.iter().map(FeatureRow::features).collect();
    let labels: Vec<ClassLabel> = table.rows.iter().filter_map(|r| r.label).collect();
    if k == 0 {
        return Err(CliError::Knn(KnnError::ZeroK));
    }
    if features.len() < 2 {
        return Err(CliError::Input("training needs at least two rows".into()));
    }
    if features.len() < k {
        return Err(CliError::Knn(KnnError::KTooLarge {
            k,
            available: features.len(),
        }));
    }
    let dataset = LabeledDataset::new(features, labels)?;
    for class in [ClassLabel::Background, ClassLabel::SpikeWave] {
        if dataset.count(class) == 0 {
            return Err(CliError::Input(format!(
                "training data has no label-{class} rows; both classes are required"
            )));
        }
    }
    let scaling = ScalingSpec::fit(dataset.features(), scaling)?;
    let config = KnnConfig {
        k,
        scaling: scaling.clone(),
        ..KnnConfig::default()
    };
    Ok(TrainedModel {
        dataset,
        scaling,
        config,
    })
}

pub fn training_summary(model: &TrainedModel) -> String {
    let mut out = String::new();
    let ds = &model.dataset;
    let _ = writeln!(out, "vectors={}", ds.len());
    let _ = writeln!(out, "label_0={}", ds.count(ClassLabel::Background));
    let _ = writeln!(out, "label_1={}", ds.count(ClassLabel::SpikeWave));
    let _ = writeln!(out, "k={}", model.config.k);
    let _ = writeln!(out, "scaling={}", model.scaling.mode().as_str());
    if model.scaling.mode() == ScalingMode::ZScore {
        let means = model.scaling.means().map(fmt_f64).join(",");
        let stds = model.scaling.stds().map(fmt_f64).join(",");
        let _ = writeln!(out, "scaling_means={means}");
        let _ = writeln!(out, "scaling_stds={stds}");
    }
    out
}

pub fn classify_table(model: &TrainedModel, table: &FeatureTable) -> Result<Vec<PredictionRow>, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Input("feature table has no rows".into()));
    }
    let queries: Vec<FeatureVector> = table.rows.iter().map(FeatureRow::features).collect();
    let predictions = classify_batch(&queries, &model.dataset, &model.config)?;
    Ok(table
        .rows
        .iter()
        .zip(predictions)
        .map(|(row, p)| PredictionRow {
            recording: row.recording.clone(),
            channel: row.channel.clone(),
            start_index: row.start_index,
            label: p.label,
            nearest_distance: p.neighbor_distances[0],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub segment: ConfusionMatrix,
    pub segment_rates: Rates,
    /// One entry per `(recording, channel)` signal; positive when any segment is positive.
    pub signal: ConfusionMatrix,
    pub signal_rates: Rates,
}

fn any_positive(labels: impl Iterator<Item = ClassLabel>) -> ClassLabel {
    let mut out = ClassLabel::Background;
    for l in labels {
        if l == ClassLabel::SpikeWave {
            out = ClassLabel::SpikeWave;
        }
    }
    out
}

pub fn evaluate(predictions: &[PredictionRow], truth: &FeatureTable) -> Result<Evaluation, CliError> {
    if predictions.len() != truth.rows.len() {
        return Err(CliError::Metrics(crate::metrics::MetricsError::LengthMismatch {
            predicted: predictions.len(),
            actual: truth.rows.len(),
        }));
    }
    let mut actual = Vec::with_capacity(truth.rows.len());
    for (i, (p, t)) in predictions.iter().zip(&truth.rows).enumerate() {
        if p.key() != t.key() {
            return Err(CliError::Input(format!(
                "row {}: prediction {:?} does not align with truth {:?}",
                i + 1,
                p.key(),
                t.key()
            )));
        }
        actual.push(t.label.ok_or_else(|| {
            CliError::Input(format!("truth row {} has no label", i + 1))
        })?);
    }
    let predicted: Vec<ClassLabel> = predictions.iter().map(|p| p.label).collect();
    let segment = confusion(&predicted, &actual)?;

    // Group by signal in order of first appearance.
    let mut keys: Vec<(&str, &str)> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, p) in predictions.iter().enumerate() {
        let key = (p.recording.as_str(), p.channel.as_str());
        match keys.iter().position(|k| *k == key) {
            Some(g) => groups[g].push(i),
            None => {
                keys.push(key);
                groups.push(vec![i]);
            }
        }
    }
    let sig_pred: Vec<ClassLabel> = groups
        .iter()
        .map(|g| any_positive(g.iter().map(|&i| predicted[i])))
        .collect();
    let sig_true: Vec<ClassLabel> = groups
        .iter()
        .map(|g| any_positive(g.iter().map(|&i| actual[i])))
        .collect();
    let signal = confusion(&sig_pred, &sig_true)?;

    Ok(Evaluation {
        segment,
        segment_rates: rates(&segment)?,
        signal,
        signal_rates: rates(&signal)?,
    })
}

fn fmt_rate(r: Rate) -> String {
    match r {
        Rate::Defined(v) => fmt_f64(v),
        Rate::Undefined => "undefined".into(),
    }
}

pub fn format_evaluation(e: &Evaluation) -> String {
    let mut out = String::new();
    for (name, cm, r) in [
        ("segment", &e.segment, &e.segment_rates),
        ("signal", &e.signal, &e.signal_rates),
    ] {
        let _ = writeln!(out, "[{name}]");
        let _ = writeln!(out, "tp={}", cm.tp);
        let _ = writeln!(out, "tn={}", cm.tn);
        let _ = writeln!(out, "fp={}", cm.fp);
        let _ = writeln!(out, "fn={}", cm.fn_);
        let _ = writeln!(out, "accuracy={}", fmt_f64(r.accuracy));
        let _ = writeln!(out, "sensitivity={}", fmt_rate(r.sensitivity));
        let _ = writeln!(out, "specificity={}", fmt_rate(r.specificity));
    }
    out
}

/// Which two parameters a scatter export pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterPair {
    MuSigma,
    MuNu,
    SigmaNu,
}

impl ScatterPair {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mu-sigma" => Some(Self::MuSigma),
            "mu-nu" => Some(Self::MuNu),
            "sigma-nu" => Some(Self::SigmaNu),
            _ => None,
        }
    }

    fn columns(self) -> (&'static str, &'static str) {
        match self {
            Self::MuSigma => ("mu", "sigma"),
            Self::MuNu => ("mu", "nu"),
            Self::SigmaNu => ("sigma", "nu"),
        }
    }

    fn pick(self, r: &FeatureRow) -> (f64, f64) {
        match self {
            Self::MuSigma => (r.mu, r.sigma),
            Self::MuNu => (r.mu, r.nu),
            Self::SigmaNu => (r.sigma, r.nu),
        }
    }
}

pub fn scatter(table: &FeatureTable, pair: ScatterPair) -> Result<String, CliError> {
    if !table.is_labeled() {
        return Err(CliError::Input("scatter export needs a labeled feature table".into()));
    }
    let (a, b) = pair.columns();
    let mut out = format!("{a},{b},label\n");
    for r in &table.rows {
        let (x, y) = pair.pick(r);
        let label = r.label.expect("checked labeled");
        let _ = writeln!(out, "{},{},{}", fmt_f64(x), fmt_f64(y), label);
    }
    Ok(out)
}
