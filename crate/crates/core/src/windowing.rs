//! Non-overlapping rectangular segmentation and segment labeling.

use thiserror::Error;

use crate::signal_io::{Annotation, ChannelName, ClassLabel, Recording};

/// Shortest window a three-parameter fit is attempted on.
pub const MIN_WINDOW_SAMPLES: usize = 8;

pub const DEFAULT_WINDOW_SAMPLES: usize = 256;
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindowError {
    #[error("window of {0} samples is shorter than the minimum of {MIN_WINDOW_SAMPLES}")]
    WindowTooShort(usize),
    #[error("channel {0} is not in the recording")]
    UnknownChannel(String),
    #[error("window of {window} samples exceeds the {available} samples of the signal")]
    WindowLargerThanSignal { window: usize, available: usize },
    #[error("overlap threshold must lie in (0, 1], got {0}")]
    InvalidOverlapThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    window_len_samples: usize,
}

impl WindowSpec {
    pub fn new(window_len_samples: usize) -> Result<Self, WindowError> {
        if window_len_samples < MIN_WINDOW_SAMPLES {
            return Err(WindowError::WindowTooShort(window_len_samples));
        }
        Ok(Self { window_len_samples })
    }

    pub fn len(&self) -> usize {
        self.window_len_samples
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            window_len_samples: DEFAULT_WINDOW_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub channel: ChannelName,
    pub start_index: usize,
    pub samples: Vec<f64>,
}

impl Segment {
    pub fn end_index(&self) -> usize {
        self.start_index + self.samples.len()
    }
}

/// Tiles the channel into `floor(N / W)` segments `[iW, (i + 1)W)`; the tail is dropped.
pub fn segment_channel(
    recording: &Recording,
    channel: &ChannelName,
    spec: WindowSpec,
) -> Result<Vec<Segment>, WindowError> {
    let index = recording
        .channel_index(channel)
        .ok_or_else(|| WindowError::UnknownChannel(channel.to_string()))?;
    let w = spec.len();
    let n = recording.num_samples();
    if w > n {
        return Err(WindowError::WindowLargerThanSignal {
            window: w,
            available: n,
        });
    }
    let samples = recording.channel_samples(index);
    Ok(samples
        .chunks_exact(w)
        .enumerate()
        .map(|(i, chunk)| Segment {
            channel: channel.clone(),
            start_index: i * w,
            samples: chunk.to_vec(),
        })
        .collect())
}

pub fn check_overlap_threshold(threshold: f64) -> Result<f64, WindowError> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(threshold)
    } else {
        Err(WindowError::InvalidOverlapThreshold(threshold))
    }
}

/// Fraction of the segment's time span covered by the union of label-1
/// annotations on the segment's channel.
pub fn spike_wave_coverage(segment: &Segment, annotations: &[Annotation], sample_rate_hz: f64) -> f64 {
    let start = segment.start_index as f64 / sample_rate_hz;
    let end = segment.end_index() as f64 / sample_rate_hz;
    let span = end - start;
    if !(span > 0.0) {
        return 0.0;
    }
    let mut clipped: Vec<(f64, f64)> = annotations
        .iter()
        .filter(|a| a.label == ClassLabel::SpikeWave && a.channel == segment.channel)
        .map(|a| (a.onset_s.max(start), a.end_s().min(end)))
        .filter(|(a, b)| b > a)
        .collect();
    clipped.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut covered = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (a, b) in clipped {
        current = match current {
            Some((ca, cb)) if a <= cb => Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                covered += cb - ca;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((ca, cb)) = current {
        covered += cb - ca;
    }
    (covered / span).min(1.0)
}

/// Label 1 when spike-and-wave coverage reaches `overlap_threshold`, else 0.
pub fn label_segment(
    segment: &Segment,
    annotations: &[Annotation],
    sample_rate_hz: f64,
    overlap_threshold: f64,
) -> ClassLabel {
    if spike_wave_coverage(segment, annotations, sample_rate_hz) >= overlap_threshold {
        ClassLabel::SpikeWave
    } else {
        ClassLabel::Background
    }
}
