//! Command-line front end: `extract`, `train`, `classify`, `evaluate`, `scatter`, `synth`.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 3 when every
//! segment fit failed.

pub mod pipeline;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::knn::{KnnError, ScalingMode};
use crate::metrics::MetricsError;
use crate::optimizer::SimplexConfig;
use crate::signal_io::{self, ChannelName, ClassLabel, SignalIoError};
use crate::synth::{self, SwdEvent, SynthError, SynthSpec};
use crate::tls_model::{FitConfig, TlsParams};
use crate::windowing::{self, WindowError, WindowSpec};

use pipeline::{ExtractInput, ExtractOptions, ScatterPair, TrainedModel, WindowMode};
use tables::FeatureTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ALL_FITS_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] SignalIoError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Knn(#[from] KnnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("every one of the {0} segment fits failed")]
    AllFitsFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AllFitsFailed(_) => EXIT_ALL_FITS_FAILED,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spikewave", version, about = "Spike-and-wave detection with t-location-scale features and kNN")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalOpts {
    /// Segment length in samples, or `whole` for one segment per channel.
    #[arg(long, global = true, default_value = "256")]
    pub window_samples: String,
    /// Fraction of a segment that label-1 annotations must cover for label 1.
    #[arg(long, global = true, default_value_t = windowing::DEFAULT_OVERLAP_THRESHOLD)]
    pub overlap_threshold: f64,
    /// Number of neighbors.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    /// Feature scaling: `none` or `zscore`.
    #[arg(long, global = true, default_value = "none")]
    pub scaling: String,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_x: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_f: f64,
    /// Simplex iteration cap (default 200 times the number of parameters).
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit t-location-scale parameters to every segment of every channel.
    Extract {
        #[arg(required = true)]
        recordings: Vec<PathBuf>,
        /// Annotation file per recording, in the same order.
        #[arg(long = "annotations")]
        annotations: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Store a labeled feature table as a kNN model.
    Train {
        features: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Predict a label for every row of a feature table.
    Classify {
        model: PathBuf,
        features: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Compare predictions against a labeled feature table.
    Evaluate {
        predictions: PathBuf,
        truth: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Export one parameter pair with labels for plotting.
    Scatter {
        features: PathBuf,
        /// `mu-sigma`, `mu-nu` or `sigma-nu`.
        #[arg(long)]
        pair: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic recordings with ground-truth annotations.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Recording length in seconds (single-recording mode) or per epoch (corpus mode).
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = synth::DEFAULT_SAMPLE_RATE_HZ)]
    pub sample_rate: f64,
    /// Comma-separated channel names.
    #[arg(long, default_value = "Cz")]
    pub channels: String,
    /// Event as `onset_s,duration_s,cycle_hz,amplitude_mv`; repeatable.
    #[arg(long = "event")]
    pub events: Vec<String>,
    /// Background noise as `mu,sigma,nu`.
    #[arg(long, default_value = "0,20,4")]
    pub background: String,
    /// Recording CSV to write (single-recording mode).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Annotation CSV to write (single-recording mode).
    #[arg(long)]
    pub annotations_out: Option<PathBuf>,
    /// Directory for an epoch corpus; switches to corpus mode.
    #[arg(long)]
    pub corpus_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 96)]
    pub spike_wave_epochs: usize,
    #[arg(long, default_value_t = 96)]
    pub background_epochs: usize,
}

impl GlobalOpts {
    pub fn window_mode(&self) -> Result<WindowMode, CliError> {
        if self.window_samples == "whole" {
            return Ok(WindowMode::WholeEpoch);
        }
        let w: usize = self.window_samples.parse().map_err(|_| {
            CliError::Input(format!(
                "--window-samples must be a positive integer or `whole`, got {:?}",
                self.window_samples
            ))
        })?;
        Ok(WindowMode::Samples(WindowSpec::new(w)?))
    }

    pub fn scaling_mode(&self) -> Result<ScalingMode, CliError> {
        ScalingMode::parse(&self.scaling).ok_or_else(|| {
            CliError::Input(format!("--scaling must be `none` or `zscore`, got {:?}", self.scaling))
        })
    }

    pub fn fit_config(&self) -> Result<FitConfig, CliError> {
        let simplex = SimplexConfig {
            tol_x: self.tol_x,
            tol_f: self.tol_f,
            max_iter: self.max_iter,
            ..SimplexConfig::default()
        };
        simplex
            .validate()
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(FitConfig {
            simplex,
            ..FitConfig::default()
        })
    }

    pub fn extract_options(&self) -> Result<ExtractOptions, CliError> {
        Ok(ExtractOptions {
            window: self.window_mode()?,
            overlap_threshold: windowing::check_overlap_threshold(self.overlap_threshold)?,
            fit: self.fit_config()?,
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn recording_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn parse_numbers<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("invalid {what} {s:?}")))?;
    values
        .try_into()
        .map_err(|_| CliError::Input(format!("{what} needs {N} comma-separated numbers, got {s:?}")))
}

/// Runs one parsed invocation, writing human-readable output to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let g = &cli.global;
    let mut say = |text: &str| {
        let _ = stdout.write_all(text.as_bytes());
    };
    match &cli.command {
        Command::Extract {
            recordings,
            annotations,
            out,
        } => {
            if !annotations.is_empty() && annotations.len() != recordings.len() {
                return Err(CliError::Input(format!(
                    "{} annotation files for {} recordings",
                    annotations.len(),
                    recordings.len()
                )));
            }
            let options = g.extract_options()?;
            let mut inputs = Vec::with_capacity(recordings.len());
            for (i, path) in recordings.iter().enumerate() {
                inputs.push(ExtractInput {
                    id: recording_id(path),
                    recording: signal_io::load_recording(path)?,
                    annotations: match annotations.get(i) {
                        Some(a) => Some(signal_io::load_annotations(a)?),
                        None => None,
                    },
                });
            }
            let (table, stats) = pipeline::extract_features(&inputs, &options)?;
            write(out, &table.to_csv())?;
            say(&format!(
                "segments={}\nfitted={}\nfailed={}\n",
                stats.segments,
                table.rows.len(),
                stats.failed
            ));
        }
        Command::Train { features, out } => {
            let table = FeatureTable::parse(&read(features)?)?;
            let model = pipeline::train(&table, g.k, g.scaling_mode()?)?;
            signal_io::save_model(&model.dataset, &model.scaling, &model.config, out)?;
            say(&pipeline::training_summary(&model));
        }
        Command::Classify {
            model,
            features,
            out,
        } => {
            let (dataset, scaling, config) = signal_io::load_model(model)?;
            let model = TrainedModel {
                dataset,
                scaling,
                config,
            };
            let table = FeatureTable::parse(&read(features)?)?;
            let predictions = pipeline::classify_table(&model, &table)?;
            write(out, &tables::predictions_to_csv(&predictions))?;
            say(&format!("predictions={}\n", predictions.len()));
        }
        Command::Evaluate {
            predictions,
            truth,
            out,
        } => {
            let predictions = tables::parse_predictions(&read(predictions)?)?;
            let truth = FeatureTable::parse(&read(truth)?)?;
            let report = pipeline::format_evaluation(&pipeline::evaluate(&predictions, &truth)?);
            if let Some(out) = out {
                write(out, &report)?;
            }
            say(&report);
        }
        Command::Scatter {
            features,
            pair,
            out,
        } => {
            let pair = ScatterPair::parse(pair).ok_or_else(|| {
                CliError::Input(format!(
                    "--pair must be mu-sigma, mu-nu or sigma-nu, got {pair:?}"
                ))
            })?;
            let table = FeatureTable::parse(&read(features)?)?;
            let data = pipeline::scatter(&table, pair)?;
            match out {
                Some(out) => write(out, &data)?,
                None => say(&data),
            }
        }
        Command::Synth(args) => run_synth(args, g.seed, &mut say)?,
    }
    Ok(())
}

fn run_synth(args: &SynthArgs, seed: u64, say: &mut dyn FnMut(&str)) -> Result<(), CliError> {
    if let Some(dir) = &args.corpus_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        let written = write_corpus(
            dir,
            args.spike_wave_epochs,
            args.background_epochs,
            args.duration,
            seed,
        )?;
        say(&format!("epochs={}\n", written.len()));
        return Ok(());
    }

    let out = args
        .out
        .as_ref()
        .ok_or_else(|| CliError::Input("synth needs --out or --corpus-dir".into()))?;
    let [mu, sigma, nu] = parse_numbers::<3>(&args.background, "--background")?;
    let background = TlsParams::new(mu, sigma, nu)
        .map_err(|e| CliError::Input(format!("--background: {e}")))?;
    let channels = args
        .channels
        .split(',')
        .map(|c| ChannelName::new(c.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = SynthSpec::new(args.duration, seed);
    spec.sample_rate_hz = args.sample_rate;
    spec.channels = channels;
    spec.background = background;
    for e in &args.events {
        let [onset_s, duration_s, cycle_hz, amplitude_mv] = parse_numbers::<4>(e, "--event")?;
        spec.swd_events.push(SwdEvent {
            onset_s,
            duration_s,
            cycle_hz,
            amplitude_mv,
        });
    }
    let (recording, annotations) = synth::generate(&spec)?;
    signal_io::save_recording(&recording, out)?;
    if let Some(path) = &args.annotations_out {
        signal_io::save_annotations(&annotations, path)?;
    }
    say(&format!(
        "samples={}\nchannels={}\nannotations={}\n",
        recording.num_samples(),
        recording.num_channels(),
        annotations.len()
    ));
    Ok(())
}

/// Writes `epoch_NNN.csv` / `epoch_NNN.ann.csv` pairs: spike-and-wave epochs
/// first, then background epochs. Epoch `i` uses seed `seed + i`.
///
/// Returns the `(recording, annotations)` paths in order.
pub fn write_corpus(
    dir: &Path,
    spike_wave: usize,
    background: usize,
    epoch_s: f64,
    seed: u64,
) -> Result<Vec<(PathBuf, PathBuf)>, CliError> {
    let mut written = Vec::with_capacity(spike_wave + background);
    let labels = std::iter::repeat_n(ClassLabel::SpikeWave, spike_wave)
        .chain(std::iter::repeat_n(ClassLabel::Background, background));
    for (i, label) in labels.enumerate() {
        let spec = synth::epoch_spec(label, epoch_s, seed.wrapping_add(i as u64));
        let (recording, annotations) = synth::generate(&spec)?;
        let rec_path = dir.join(format!("epoch_{i:03}.csv"));
        let ann_path = dir.join(format!("epoch_{i:03}.ann.csv"));
        signal_io::save_recording(&recording, &rec_path)?;
        signal_io::save_annotations(&annotations, &ann_path)?;
        written.push((rec_path, ann_path));
    }
    Ok(written)
}

/// Parses `args`, runs, and maps the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
