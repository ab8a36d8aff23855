//! Deterministic synthetic recordings with known spike-and-wave intervals.
//!
//! Background activity is t-location-scale noise. Inside an event the signal
//! is a repeating spike-and-wave template (a narrow triangular spike over the
//! first tenth of each cycle, then a negative half-sine slow wave) scaled to
//! the event amplitude, plus background noise at one tenth of its scale.

use rand::Rng;
use thiserror::Error;

use crate::signal_io::{Annotation, ChannelName, ClassLabel, Recording, SignalIoError};
use crate::tls_model::{generator, tls_sample_with, TlsError, TlsParams};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 256.0;
pub const DEFAULT_AMPLITUDE_MV: f64 = 300.0;
pub const DEFAULT_CYCLE_BAND_HZ: (f64, f64) = (2.5, 4.5);
pub const DEFAULT_BACKGROUND: TlsParams = TlsParams {
    mu: 0.0,
    sigma: 20.0,
    nu: 4.0,
};

/// Fraction of each cycle taken by the spike.
const SPIKE_FRACTION: f64 = 0.1;
const EVENT_NOISE_SCALE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("events {0} and {1} overlap")]
    OverlappingEvents(usize, usize),
    #[error("event {0} lies outside [0, duration]")]
    EventOutOfRange(usize),
    #[error("event {index}: cycle frequency {cycle_hz} Hz outside [{low}, {high}] Hz")]
    CycleOutOfBand {
        index: usize,
        cycle_hz: f64,
        low: f64,
        high: f64,
    },
    #[error("event {0}: amplitude must be positive and finite")]
    InvalidAmplitude(usize),
    #[error("duration and sample rate must be positive and yield at least one sample")]
    InvalidDuration,
    #[error("at least one channel is required")]
    NoChannels,
    #[error(transparent)]
    Background(#[from] TlsError),
    #[error(transparent)]
    Recording(#[from] SignalIoError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwdEvent {
    pub onset_s: f64,
    pub duration_s: f64,
    pub cycle_hz: f64,
    pub amplitude_mv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub channels: Vec<ChannelName>,
    pub swd_events: Vec<SwdEvent>,
    pub background: TlsParams,
    pub cycle_band_hz: (f64, f64),
    pub seed: u64,
}

impl SynthSpec {
    /// Background-only single-channel (`Cz`) spec.
    pub fn new(duration_s: f64, seed: u64) -> Self {
        Self {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            duration_s,
            channels: vec![ChannelName::new("Cz").expect("valid name")],
            swd_events: Vec::new(),
            background: DEFAULT_BACKGROUND,
            cycle_band_hz: DEFAULT_CYCLE_BAND_HZ,
            seed,
        }
    }

    pub fn with_event(mut self, event: SwdEvent) -> Self {
        self.swd_events.push(event);
        self
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.sample_rate_hz > 0.0 && self.duration_s > 0.0)
            || !self.sample_rate_hz.is_finite()
            || !self.duration_s.is_finite()
            || self.num_samples() == 0
        {
            return Err(SynthError::InvalidDuration);
        }
        if self.channels.is_empty() {
            return Err(SynthError::NoChannels);
        }
        self.background.validate()?;
        let (low, high) = self.cycle_band_hz;
        for (i, e) in self.swd_events.iter().enumerate() {
            let end = e.onset_s + e.duration_s;
            if !(e.onset_s >= 0.0 && e.duration_s > 0.0 && end <= self.duration_s) {
                return Err(SynthError::EventOutOfRange(i));
            }
            if !(e.cycle_hz >= low && e.cycle_hz <= high) {
                return Err(SynthError::CycleOutOfBand {
                    index: i,
                    cycle_hz: e.cycle_hz,
                    low,
                    high,
                });
            }
            if !(e.amplitude_mv > 0.0 && e.amplitude_mv.is_finite()) {
                return Err(SynthError::InvalidAmplitude(i));
            }
        }
        for (i, a) in self.swd_events.iter().enumerate() {
            for (j, b) in self.swd_events.iter().enumerate().skip(i + 1) {
                let disjoint = a.onset_s + a.duration_s <= b.onset_s
                    || b.onset_s + b.duration_s <= a.onset_s;
                if !disjoint {
                    return Err(SynthError::OverlappingEvents(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Unit-amplitude template value at `phase` in `[0, 1)` of a cycle.
pub fn template(phase: f64) -> f64 {
    if phase < SPIKE_FRACTION {
        let half = 0.5 * SPIKE_FRACTION;
        1.0 - (phase - half).abs() / half
    } else {
        -(std::f64::consts::PI * (phase - SPIKE_FRACTION) / (1.0 - SPIKE_FRACTION)).sin()
    }
}

/// Builds the recording and one label-1 annotation per event per channel.
///
/// Channel `j` draws its background from stream `j` of the spec's seed.
pub fn generate(spec: &SynthSpec) -> Result<(Recording, Vec<Annotation>), SynthError> {
    spec.validate()?;
    let n = spec.num_samples();
    let fs = spec.sample_rate_hz;
    let bg = spec.background;

    let mut columns = Vec::with_capacity(spec.channels.len());
    for j in 0..spec.channels.len() {
        let mut rng = generator(spec.seed, j as u64);
        let mut column = tls_sample_with(&bg, n, &mut rng)?;
        for e in &spec.swd_events {
            let start = (e.onset_s * fs).round() as usize;
            let end = (((e.onset_s + e.duration_s) * fs).round() as usize).min(n);
            for (t, x) in column.iter_mut().enumerate().take(end).skip(start) {
                let elapsed = (t - start) as f64 / fs;
                let phase = (elapsed * e.cycle_hz).fract();
                *x = e.amplitude_mv * template(phase) + bg.mu + EVENT_NOISE_SCALE * (*x - bg.mu);
            }
        }
        columns.push(column);
    }

    let recording = Recording::from_columns(fs, spec.channels.clone(), columns)?;
    let annotations = spec
        .channels
        .iter()
        .flat_map(|c| {
            spec.swd_events.iter().map(move |e| Annotation {
                channel: c.clone(),
                onset_s: e.onset_s,
                duration_s: e.duration_s,
                label: ClassLabel::SpikeWave,
            })
        })
        .collect();
    Ok((recording, annotations))
}

/// Single-channel training/test epoch.
///
/// A spike-and-wave epoch carries one event spanning everything but the first
/// and last half second, with a cycle frequency drawn from the default band.
/// A background epoch has no event.
pub fn epoch_spec(label: ClassLabel, duration_s: f64, seed: u64) -> SynthSpec {
    let spec = SynthSpec::new(duration_s, seed);
    match label {
        ClassLabel::Background => spec,
        ClassLabel::SpikeWave => {
            // The per-epoch parameter draw uses a stream no channel uses.
            let mut rng = generator(seed, u64::MAX);
            let (low, high) = DEFAULT_CYCLE_BAND_HZ;
            let cycle_hz = rng.random_range(low..=high);
            spec.with_event(SwdEvent {
                onset_s: 0.5,
                duration_s: duration_s - 1.0,
                cycle_hz,
                amplitude_mv: DEFAULT_AMPLITUDE_MV,
            })
        }
    }
}
