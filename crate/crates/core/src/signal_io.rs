//! Recordings, annotations and model files on disk.
//!
//! Recording CSV layout:
//!
//! ```text
//! # sample_rate_hz=256
//! Fp1,Fp2,Cz
//! 12.5,-3.25,0.0
//! ...
//! ```
//!
//! Annotation CSV: one `channel,onset_s,duration_s,label` record per line,
//! `#` lines ignored. Model files are JSON.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::fmt_f64;
use crate::knn::{KnnConfig, LabeledDataset, Metric, ScalingMode, ScalingSpec, Vote};

pub const MODEL_SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum SignalIoError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("missing or malformed sample rate line (expected `# sample_rate_hz=<value>`)")]
    MissingSampleRate,
    #[error("sample rate must be positive and finite, got {0}")]
    NonPositiveSampleRate(f64),
    #[error("non-numeric sample {value:?} at line {line}, column {column}")]
    NonNumericSample {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line} has {found} values, header declares {expected}")]
    InconsistentRowWidth {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("recording has no data rows")]
    NoSamples,
    #[error("malformed annotation at line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("unknown label {value:?} at line {line} (expected 0 or 1)")]
    UnknownLabel { line: usize, value: String },
    #[error("negative onset {onset} at line {line}")]
    NegativeOnset { line: usize, onset: f64 },
    #[error("cannot save a model with an empty dataset")]
    EmptyDataset,
    #[error("unsupported model schema version {0:?}")]
    UnsupportedVersion(String),
    #[error("model file violates the schema: {0}")]
    SchemaViolation(String),
}

fn io_err(path: &Path, source: io::Error) -> SignalIoError {
    if source.kind() == io::ErrorKind::NotFound {
        SignalIoError::MissingFile(path.to_path_buf())
    } else {
        SignalIoError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Electrode name such as `Fp1` or `Cz`: non-empty, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelName(String);

impl ChannelName {
    pub fn new(name: impl Into<String>) -> Result<Self, SignalIoError> {
        let name = name.into();
        if name.is_empty() {
            return Err(SignalIoError::MalformedHeader("empty channel name".into()));
        }
        if name.chars().any(char::is_whitespace) {
            return Err(SignalIoError::MalformedHeader(format!(
                "channel name {name:?} contains whitespace"
            )));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ChannelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Binary target: spike-and-wave or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Background = 0,
    SpikeWave = 1,
}

impl ClassLabel {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::Background),
            1 => Some(Self::SpikeWave),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Background => Self::SpikeWave,
            Self::SpikeWave => Self::Background,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "0" => Some(Self::Background),
            "1" => Some(Self::SpikeWave),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Simultaneously sampled channels, stored row-major as `N` time rows by `M` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    sample_rate_hz: f64,
    channels: Vec<ChannelName>,
    data: Vec<f64>,
}

impl Recording {
    /// `columns[j]` holds the samples of `channels[j]`.
    pub fn from_columns(
        sample_rate_hz: f64,
        channels: Vec<ChannelName>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, SignalIoError> {
        if channels.len() != columns.len() {
            return Err(SignalIoError::MalformedHeader(format!(
                "{} channel names for {} columns",
                channels.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * columns.len());
        for t in 0..n {
            for (j, col) in columns.iter().enumerate() {
                let v = *col.get(t).ok_or(SignalIoError::InconsistentRowWidth {
                    line: t,
                    expected: columns.len(),
                    found: j,
                })?;
                data.push(v);
            }
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(SignalIoError::InconsistentRowWidth {
                line: n,
                expected: columns.len(),
                found: columns.iter().filter(|c| c.len() > n).count(),
            });
        }
        Self::from_rows(sample_rate_hz, channels, data)
    }

    fn from_rows(
        sample_rate_hz: f64,
        channels: Vec<ChannelName>,
        data: Vec<f64>,
    ) -> Result<Self, SignalIoError> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(SignalIoError::NonPositiveSampleRate(sample_rate_hz));
        }
        if channels.is_empty() {
            return Err(SignalIoError::MalformedHeader("no channels".into()));
        }
        let mut seen = HashSet::new();
        for c in &channels {
            if !seen.insert(c) {
                return Err(SignalIoError::MalformedHeader(format!(
                    "duplicate channel name {c}"
                )));
            }
        }
        if data.is_empty() {
            return Err(SignalIoError::NoSamples);
        }
        let m = channels.len();
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(SignalIoError::NonNumericSample {
                line: i / m,
                column: i % m,
                value: data[i].to_string(),
            });
        }
        Ok(Self {
            sample_rate_hz,
            channels,
            data,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> &[ChannelName] {
        &self.channels
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_samples(&self) -> usize {
        self.data.len() / self.channels.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.num_samples() as f64 / self.sample_rate_hz
    }

    pub fn channel_index(&self, name: &ChannelName) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let m = self.channels.len();
        &self.data[t * m..(t + 1) * m]
    }

    /// Copy of one channel's samples in time order.
    pub fn channel_samples(&self, index: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(index)
            .step_by(self.channels.len())
            .copied()
            .collect()
    }
}

/// One labeled interval on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub channel: ChannelName,
    pub onset_s: f64,
    pub duration_s: f64,
    pub label: ClassLabel,
}

impl Annotation {
    pub fn end_s(&self) -> f64 {
        self.onset_s + self.duration_s
    }

    /// Checks the annotation names an existing channel and ends inside the recording.
    pub fn fits(&self, recording: &Recording) -> bool {
        recording.channel_index(&self.channel).is_some()
            && self.end_s() <= recording.duration_s() + 1e-9
    }
}

fn parse_sample_rate(line: &str) -> Result<f64, SignalIoError> {
    let rest = line
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix("sample_rate_hz"))
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('='))
        .ok_or(SignalIoError::MissingSampleRate)?;
    let rate: f64 = rest
        .trim()
        .parse()
        .map_err(|_| SignalIoError::MissingSampleRate)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(SignalIoError::NonPositiveSampleRate(rate));
    }
    Ok(rate)
}

pub fn parse_recording(text: &str) -> Result<Recording, SignalIoError> {
    let mut lines = text.lines().enumerate();
    let (_, rate_line) = lines.next().ok_or(SignalIoError::MissingSampleRate)?;
    let rate = parse_sample_rate(rate_line)?;
    let (_, header) = lines
        .next()
        .ok_or_else(|| SignalIoError::MalformedHeader("missing channel header line".into()))?;
    let channels = header
        .split(',')
        .map(|s| ChannelName::new(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let m = channels.len();

    let mut data = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut found = 0;
        for (column, field) in line.split(',').enumerate() {
            found += 1;
            if column >= m {
                continue;
            }
            let field = field.trim();
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| SignalIoError::NonNumericSample {
                    line: line_no,
                    column: column + 1,
                    value: field.to_string(),
                })?;
            data.push(v);
        }
        if found != m {
            return Err(SignalIoError::InconsistentRowWidth {
                line: line_no,
                expected: m,
                found,
            });
        }
    }
    Recording::from_rows(rate, channels, data)
}

pub fn load_recording(path: impl AsRef<Path>) -> Result<Recording, SignalIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_recording(&text)
}

pub fn format_recording(recording: &Recording) -> String {
    let mut out = format!("# sample_rate_hz={}\n", fmt_f64(recording.sample_rate_hz));
    let names: Vec<&str> = recording.channels.iter().map(ChannelName::as_str).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for t in 0..recording.num_samples() {
        let row: Vec<String> = recording.row(t).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn save_recording(recording: &Recording, path: impl AsRef<Path>) -> Result<(), SignalIoError> {
    let path = path.as_ref();
    fs::write(path, format_recording(recording)).map_err(|e| io_err(path, e))
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, SignalIoError> {
    let f = field.ok_or_else(|| SignalIoError::MalformedLine {
        line,
        reason: format!("missing {what}"),
    })?;
    f.trim().parse().map_err(|_| SignalIoError::MalformedLine {
        line,
        reason: format!("invalid {what} {f:?}"),
    })
}

pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>, SignalIoError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(SignalIoError::MalformedLine {
                line,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let channel = ChannelName::new(fields[0]).map_err(|_| SignalIoError::MalformedLine {
            line,
            reason: format!("invalid channel name {:?}", fields[0]),
        })?;
        let onset_s: f64 = parse_field(Some(fields[1]), line, "onset")?;
        let duration_s: f64 = parse_field(Some(fields[2]), line, "duration")?;
        let label = ClassLabel::parse(fields[3]).ok_or_else(|| SignalIoError::UnknownLabel {
            line,
            value: fields[3].to_string(),
        })?;
        if !onset_s.is_finite() {
            return Err(SignalIoError::MalformedLine {
                line,
                reason: "onset is not finite".into(),
            });
        }
        if onset_s < 0.0 {
            return Err(SignalIoError::NegativeOnset {
                line,
                onset: onset_s,
            });
        }
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return Err(SignalIoError::MalformedLine {
                line,
                reason: format!("duration must be positive, got {duration_s}"),
            });
        }
        out.push(Annotation {
            channel,
            onset_s,
            duration_s,
            label,
        });
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>, SignalIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_annotations(&text)
}

pub fn format_annotations(annotations: &[Annotation]) -> String {
    let mut out = String::from("# channel,onset_s,duration_s,label\n");
    for a in annotations {
        out.push_str(&format!(
            "{},{},{},{}\n",
            a.channel,
            fmt_f64(a.onset_s),
            fmt_f64(a.duration_s),
            a.label
        ));
    }
    out
}

pub fn save_annotations(
    annotations: &[Annotation],
    path: impl AsRef<Path>,
) -> Result<(), SignalIoError> {
    let path = path.as_ref();
    fs::write(path, format_annotations(annotations)).map_err(|e| io_err(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingDoc {
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    means: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stds: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: String,
    scaling: ScalingDoc,
    k: usize,
    metric: String,
    vote: String,
    features: Vec<[f64; 3]>,
    labels: Vec<u8>,
}

fn model_to_doc(dataset: &LabeledDataset, scaling: &ScalingSpec, hyper: &KnnConfig) -> ModelDoc {
    let scaling = match scaling.mode() {
        ScalingMode::None => ScalingDoc {
            mode: "none".into(),
            means: None,
            stds: None,
        },
        ScalingMode::ZScore => ScalingDoc {
            mode: "zscore".into(),
            means: Some(scaling.means()),
            stds: Some(scaling.stds()),
        },
    };
    ModelDoc {
        version: MODEL_SCHEMA_VERSION.into(),
        scaling,
        k: hyper.k,
        metric: hyper.metric.as_str().into(),
        vote: hyper.vote.as_str().into(),
        features: dataset.features().to_vec(),
        labels: dataset.labels().iter().map(|l| l.as_u8()).collect(),
    }
}

/// Serialized model text. `f64` values are written in shortest round-trip form.
pub fn format_model(
    dataset: &LabeledDataset,
    scaling: &ScalingSpec,
    hyper: &KnnConfig,
) -> Result<String, SignalIoError> {
    if dataset.is_empty() {
        return Err(SignalIoError::EmptyDataset);
    }
    let mut text = serde_json::to_string_pretty(&model_to_doc(dataset, scaling, hyper))
        .map_err(|e| SignalIoError::SchemaViolation(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn save_model(
    dataset: &LabeledDataset,
    scaling: &ScalingSpec,
    hyper: &KnnConfig,
    path: impl AsRef<Path>,
) -> Result<(), SignalIoError> {
    let path = path.as_ref();
    let text = format_model(dataset, scaling, hyper)?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn parse_model(text: &str) -> Result<(LabeledDataset, ScalingSpec, KnnConfig), SignalIoError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SignalIoError::SchemaViolation(e.to_string()))?;
    match value.get("version").and_then(|v| v.as_str()) {
        Some(MODEL_SCHEMA_VERSION) => {}
        Some(other) => return Err(SignalIoError::UnsupportedVersion(other.to_string())),
        None => return Err(SignalIoError::SchemaViolation("missing version".into())),
    }
    let doc: ModelDoc =
        serde_json::from_value(value).map_err(|e| SignalIoError::SchemaViolation(e.to_string()))?;
    let violation = |msg: String| SignalIoError::SchemaViolation(msg);

    let scaling = match doc.scaling.mode.as_str() {
        "none" => ScalingSpec::identity(),
        "zscore" => {
            let (means, stds) = doc
                .scaling
                .means
                .zip(doc.scaling.stds)
                .ok_or_else(|| violation("zscore scaling needs means and stds".into()))?;
            ScalingSpec::zscore(means, stds).map_err(|e| violation(e.to_string()))?
        }
        other => return Err(violation(format!("unknown scaling mode {other:?}"))),
    };
    let metric = Metric::parse(&doc.metric)
        .ok_or_else(|| violation(format!("unknown metric {:?}", doc.metric)))?;
    let vote =
        Vote::parse(&doc.vote).ok_or_else(|| violation(format!("unknown vote {:?}", doc.vote)))?;
    let labels = doc
        .labels
        .iter()
        .map(|&l| ClassLabel::from_u8(l).ok_or_else(|| violation(format!("unknown label {l}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let dataset =
        LabeledDataset::new(doc.features, labels).map_err(|e| violation(e.to_string()))?;
    if doc.k == 0 || doc.k > dataset.len() {
        return Err(violation(format!(
            "k = {} incompatible with {} stored vectors",
            doc.k,
            dataset.len()
        )));
    }
    let config = KnnConfig {
        k: doc.k,
        metric,
        vote,
        scaling: scaling.clone(),
    };
    Ok((dataset, scaling, config))
}

pub fn load_model(
    path: impl AsRef<Path>,
) -> Result<(LabeledDataset, ScalingSpec, KnnConfig), SignalIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MONTAGE: [&str; 22] = [
        "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz", "C4", "T4", "T5", "P3",
        "Pz", "P4", "T6", "O1", "O2", "Oz", "FT10", "FT9",
    ];

    #[test]
    fn small_recording() {
        let r = parse_recording("# sample_rate_hz=256\nCz,Pz\n1,2\n3,4\n5.5,-6\n").unwrap();
        assert_eq!(r.num_samples(), 3);
        assert_eq!(r.num_channels(), 2);
        assert_eq!(r.sample_rate_hz(), 256.0);
        assert_eq!(r.channel_samples(1), vec![2.0, 4.0, -6.0]);
    }

    #[test]
    fn full_montage() {
        let mut text = String::from("# sample_rate_hz=256\n");
        text.push_str(&MONTAGE.join(","));
        text.push('\n');
        for t in 0..10 {
            let row: Vec<String> = (0..22).map(|j| (t * 22 + j).to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let r = parse_recording(&text).unwrap();
        assert_eq!(r.num_channels(), 22);
        assert_eq!(r.num_samples(), 10);
        assert_eq!(r.channels()[20].as_str(), "FT10");
    }

    #[test]
    fn recording_errors() {
        assert!(matches!(
            parse_recording("# sample_rate_hz=256\nCz,Cz\n1,2\n"),
            Err(SignalIoError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_recording("# sample_rate_hz=256\nCz,\n1,2\n"),
            Err(SignalIoError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_recording("# sample_rate_hz=0\nCz\n1\n"),
            Err(SignalIoError::NonPositiveSampleRate(_))
        ));
        assert!(matches!(
            parse_recording("Cz\n1\n"),
            Err(SignalIoError::MissingSampleRate)
        ));
        match parse_recording("# sample_rate_hz=256\nCz,Pz\n1,2\n3,abc\n") {
            Err(SignalIoError::NonNumericSample { line, column, value }) => {
                assert_eq!((line, column, value.as_str()), (4, 2, "abc"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_recording("# sample_rate_hz=256\nCz,Pz\n1,2\n3\n"),
            Err(SignalIoError::InconsistentRowWidth { line: 4, expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse_recording("# sample_rate_hz=256\nCz,Pz\n1,2,3\n"),
            Err(SignalIoError::InconsistentRowWidth { found: 3, .. })
        ));
        assert!(matches!(
            load_recording("/definitely/not/here.csv"),
            Err(SignalIoError::MissingFile(_))
        ));
    }

    #[test]
    fn annotations() {
        let a = parse_annotations("# comment\nCz,1.5,0.5,1\nFp1,0.0,60.0,0\n").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].channel.as_str(), "Cz");
        assert_eq!((a[0].onset_s, a[0].duration_s, a[0].label), (1.5, 0.5, ClassLabel::SpikeWave));
        assert_eq!((a[1].onset_s, a[1].duration_s, a[1].label), (0.0, 60.0, ClassLabel::Background));
        assert!(matches!(
            parse_annotations("Cz,-1,0.5,1"),
            Err(SignalIoError::NegativeOnset { line: 1, .. })
        ));
        assert!(matches!(
            parse_annotations("Cz,1,0.5,2"),
            Err(SignalIoError::UnknownLabel { .. })
        ));
        assert!(matches!(
            parse_annotations("Cz,1,0.5"),
            Err(SignalIoError::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_annotations("Cz,x,0.5,1"),
            Err(SignalIoError::MalformedLine { .. })
        ));
    }

    #[test]
    fn annotations_round_trip() {
        let a = parse_annotations("Cz,1.5,0.5,1\nPz,0.1,0.30000000000000004,0\n").unwrap();
        assert_eq!(parse_annotations(&format_annotations(&a)).unwrap(), a);
    }

    fn sample_model() -> (LabeledDataset, ScalingSpec, KnnConfig) {
        let feats = vec![[0.1, 20.0, 3.0], [-150.3, 95.2, 60.5], [1.0 / 3.0, 1e-7, 1e6]];
        let labels = vec![ClassLabel::Background, ClassLabel::SpikeWave, ClassLabel::Background];
        let ds = LabeledDataset::new(feats, labels).unwrap();
        let scaling = ScalingSpec::fit(ds.features(), ScalingMode::ZScore).unwrap();
        let cfg = KnnConfig {
            k: 1,
            scaling: scaling.clone(),
            ..KnnConfig::default()
        };
        (ds, scaling, cfg)
    }

    #[test]
    fn model_round_trip_is_exact() {
        let (ds, scaling, cfg) = sample_model();
        let text = format_model(&ds, &scaling, &cfg).unwrap();
        let (ds2, scaling2, cfg2) = parse_model(&text).unwrap();
        assert_eq!(ds, ds2);
        assert_eq!(scaling, scaling2);
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn model_errors() {
        let (ds, scaling, cfg) = sample_model();
        let text = format_model(&ds, &scaling, &cfg).unwrap();
        let bumped = text.replace("\"v1\"", "\"v999\"");
        assert!(matches!(
            parse_model(&bumped),
            Err(SignalIoError::UnsupportedVersion(v)) if v == "v999"
        ));
        let truncated = &text[..text.len() / 2];
        assert!(matches!(parse_model(truncated), Err(SignalIoError::SchemaViolation(_))));
        let bad_label = text.replace("\"labels\": [\n    0,", "\"labels\": [\n    7,");
        assert!(matches!(parse_model(&bad_label), Err(SignalIoError::SchemaViolation(_))));
    }

    #[test]
    fn model_file_declares_every_entry() {
        let feats: Vec<[f64; 3]> = (0..192).map(|i| [i as f64, 1.0 + i as f64, 3.0]).collect();
        let labels = (0..192)
            .map(|i| if i < 96 { ClassLabel::SpikeWave } else { ClassLabel::Background })
            .collect();
        let ds = LabeledDataset::new(feats, labels).unwrap();
        let text = format_model(&ds, &ScalingSpec::identity(), &KnnConfig::default()).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["features"].as_array().unwrap().len(), 192);
        assert_eq!(doc["labels"].as_array().unwrap().len(), 192);
        assert_eq!(doc["k"], 1);
        assert_eq!(doc["metric"], "euclidean");
        assert_eq!(doc["vote"], "equal_weight");
        assert_eq!(doc["scaling"]["mode"], "none");
    }

    #[test]
    fn empty_dataset_cannot_be_saved() {
        let ds = LabeledDataset::empty();
        assert!(matches!(
            format_model(&ds, &ScalingSpec::identity(), &KnnConfig::default()),
            Err(SignalIoError::EmptyDataset)
        ));
    }
}
