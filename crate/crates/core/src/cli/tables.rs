//! CSV artifacts exchanged between pipeline stages.

use std::fmt::Write as _;

use crate::format::fmt_f64;
use crate::knn::FeatureVector;
use crate::signal_io::ClassLabel;

use super::CliError;

pub const FEATURE_HEADER: &str = "recording,channel,start_index,mu,sigma,nu,label";
pub const PREDICTION_HEADER: &str = "recording,channel,start_index,label,nearest_distance";

/// One fitted segment.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub recording: String,
    pub channel: String,
    pub start_index: usize,
    pub mu: f64,
    pub sigma: f64,
    pub nu: f64,
    pub label: Option<ClassLabel>,
}

impl FeatureRow {
    pub fn features(&self) -> FeatureVector {
        [self.mu, self.sigma, self.nu]
    }

    pub fn key(&self) -> (&str, &str, usize) {
        (&self.recording, &self.channel, self.start_index)
    }
}

/// Rows ordered recording by recording, channel-major, time-ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn is_labeled(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.label.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FEATURE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let label = r.label.map(|l| l.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.recording,
                r.channel,
                r.start_index,
                fmt_f64(r.mu),
                fmt_f64(r.sigma),
                fmt_f64(r.nu),
                label
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == FEATURE_HEADER => {}
            _ => {
                return Err(CliError::Input(format!(
                    "feature table must start with header `{FEATURE_HEADER}`"
                )))
            }
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| CliError::Input(format!("feature table line {}: {what}", idx + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let num = |s: &str, name: &str| -> Result<f64, CliError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(&format!("invalid {name} {s:?}")))
            };
            let label = match f[6] {
                "" => None,
                s => Some(ClassLabel::parse(s).ok_or_else(|| bad(&format!("invalid label {s:?}")))?),
            };
            rows.push(FeatureRow {
                recording: f[0].to_string(),
                channel: f[1].to_string(),
                start_index: f[2].parse().map_err(|_| bad("invalid start_index"))?,
                mu: num(f[3], "mu")?,
                sigma: num(f[4], "sigma")?,
                nu: num(f[5], "nu")?,
                label,
            });
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub recording: String,
    pub channel: String,
    pub start_index: usize,
    pub label: ClassLabel,
    pub nearest_distance: f64,
}

impl PredictionRow {
    pub fn key(&self) -> (&str, &str, usize) {
        (&self.recording, &self.channel, self.start_index)
    }
}

pub fn predictions_to_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from(PREDICTION_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.recording,
            r.channel,
            r.start_index,
            r.label,
            fmt_f64(r.nearest_distance)
        );
    }
    out
}

pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRow>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == PREDICTION_HEADER => {}
        _ => {
            return Err(CliError::Input(format!(
                "predictions file must start with header `{PREDICTION_HEADER}`"
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Input(format!("predictions line {}: {what}", idx + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        rows.push(PredictionRow {
            recording: f[0].to_string(),
            channel: f[1].to_string(),
            start_index: f[2].parse().map_err(|_| bad("invalid start_index"))?,
            label: ClassLabel::parse(f[3]).ok_or_else(|| bad("invalid label"))?,
            nearest_distance: f[4].parse().map_err(|_| bad("invalid distance"))?,
        });
    }
    Ok(rows)
}
