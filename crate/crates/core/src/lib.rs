//! Spike-and-wave detection for multichannel EEG.
//!
//! Each channel is cut into fixed-length segments, a t-location-scale
//! distribution is fitted to every segment by maximum likelihood, and the
//! fitted `(mu, sigma, nu)` triples are classified with a k-nearest-neighbors
//! vote.

pub mod cli;
pub mod format;
pub mod knn;
pub mod metrics;
pub mod optimizer;
pub mod signal_io;
pub mod synth;
pub mod tls_model;
pub mod windowing;

pub use knn::{classify, classify_batch, KnnConfig, LabeledDataset, Prediction, ScalingSpec};
pub use signal_io::{Annotation, ChannelName, ClassLabel, Recording};
pub use tls_model::{fit_mle, FitConfig, FitReport, TlsParams};
