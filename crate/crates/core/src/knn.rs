//! k-nearest-neighbors classification of `(mu, sigma, nu)` feature vectors.
//!
//! The prediction is the label with the most votes among the `k` training
//! vectors closest to the query, each neighbor contributing one vote to its
//! own label. Exhaustive scan; no spatial index.
//!
//! Ties are resolved deterministically: equal distances go to the lower
//! training index, and an even vote goes to the label of the nearest neighbor.

use thiserror::Error;

use crate::signal_io::ClassLabel;

pub type FeatureVector = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnnError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the {available} stored training vectors")]
    KTooLarge { k: usize, available: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("training feature {0} has a non-finite component")]
    NonFiniteFeature(usize),
    #[error("query has a non-finite component")]
    NonFiniteQuery,
    #[error("query {index}: {source}")]
    InBatch {
        index: usize,
        #[source]
        source: Box<KnnError>,
    },
    #[error("cannot standardize dimension {0}: it has zero spread")]
    ZeroVarianceDimension(usize),
    #[error("scaling needs at least one feature vector (two for zscore)")]
    NotEnoughFeatures,
    #[error("zscore standard deviations must be positive and finite")]
    InvalidScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclidean" => Some(Metric::Euclidean),
            _ => None,
        }
    }

    pub fn distance(self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Vote {
    #[default]
    EqualWeight,
}

impl Vote {
    pub fn as_str(self) -> &'static str {
        match self {
            Vote::EqualWeight => "equal_weight",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "equal_weight" => Some(Vote::EqualWeight),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    #[default]
    None,
    ZScore,
}

impl ScalingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::None => "none",
            ScalingMode::ZScore => "zscore",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(ScalingMode::None),
            "zscore" => Some(ScalingMode::ZScore),
            _ => None,
        }
    }
}

/// Per-dimension standardization applied to both stored vectors and queries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalingSpec {
    mode: ScalingMode,
    means: FeatureVector,
    stds: FeatureVector,
}

impl ScalingSpec {
    pub fn identity() -> Self {
        Self {
            mode: ScalingMode::None,
            means: [0.0; 3],
            stds: [1.0; 3],
        }
    }

    pub fn zscore(means: FeatureVector, stds: FeatureVector) -> Result<Self, KnnError> {
        if means.iter().any(|m| !m.is_finite()) || stds.iter().any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(KnnError::InvalidScaling);
        }
        Ok(Self {
            mode: ScalingMode::ZScore,
            means,
            stds,
        })
    }

    /// Statistics come from `features` only; standard deviations use the `n - 1` divisor.
    pub fn fit(features: &[FeatureVector], mode: ScalingMode) -> Result<Self, KnnError> {
        if features.is_empty() {
            return Err(KnnError::NotEnoughFeatures);
        }
        match mode {
            ScalingMode::None => Ok(Self::identity()),
            ScalingMode::ZScore => {
                if features.len() < 2 {
                    return Err(KnnError::NotEnoughFeatures);
                }
                let n = features.len() as f64;
                let mut means = [0.0; 3];
                let mut stds = [0.0; 3];
                for d in 0..3 {
                    let mean = features.iter().map(|f| f[d]).sum::<f64>() / n;
                    let var =
                        features.iter().map(|f| (f[d] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                    let std = var.sqrt();
                    if !(std > 0.0) {
                        return Err(KnnError::ZeroVarianceDimension(d));
                    }
                    means[d] = mean;
                    stds[d] = std;
                }
                Self::zscore(means, stds)
            }
        }
    }

    pub fn mode(&self) -> ScalingMode {
        self.mode
    }

    pub fn means(&self) -> FeatureVector {
        self.means
    }

    pub fn stds(&self) -> FeatureVector {
        self.stds
    }

    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        match self.mode {
            ScalingMode::None => *v,
            ScalingMode::ZScore => {
                [0, 1, 2].map(|d| (v[d] - self.means[d]) / self.stds[d])
            }
        }
    }
}

/// Training vectors with their labels, index-aligned.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    features: Vec<FeatureVector>,
    labels: Vec<ClassLabel>,
}

impl LabeledDataset {
    pub fn new(features: Vec<FeatureVector>, labels: Vec<ClassLabel>) -> Result<Self, KnnError> {
        if features.len() != labels.len() {
            return Err(KnnError::LengthMismatch {
                features: features.len(),
                labels: labels.len(),
            });
        }
        if let Some(i) = features.iter().position(|f| f.iter().any(|v| !v.is_finite())) {
            return Err(KnnError::NonFiniteFeature(i));
        }
        Ok(Self { features, labels })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub metric: Metric,
    pub vote: Vote,
    pub scaling: ScalingSpec,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 1,
            metric: Metric::Euclidean,
            vote: Vote::EqualWeight,
            scaling: ScalingSpec::identity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    /// Training indices of the neighbors, nearest first.
    pub neighbor_indices: Vec<usize>,
    /// Distances in the scaled space, ascending.
    pub neighbor_distances: Vec<f64>,
}

fn check(dataset: &LabeledDataset, config: &KnnConfig) -> Result<(), KnnError> {
    if config.k == 0 {
        return Err(KnnError::ZeroK);
    }
    if dataset.is_empty() {
        return Err(KnnError::EmptyDataset);
    }
    if config.k > dataset.len() {
        return Err(KnnError::KTooLarge {
            k: config.k,
            available: dataset.len(),
        });
    }
    Ok(())
}

fn scaled_features(dataset: &LabeledDataset, scaling: &ScalingSpec) -> Vec<FeatureVector> {
    dataset.features.iter().map(|f| scaling.apply(f)).collect()
}

fn classify_scaled(
    query: &FeatureVector,
    scaled: &[FeatureVector],
    labels: &[ClassLabel],
    config: &KnnConfig,
) -> Result<Prediction, KnnError> {
    if query.iter().any(|v| !v.is_finite()) {
        return Err(KnnError::NonFiniteQuery);
    }
    let q = config.scaling.apply(query);
    let k = config.k;

    // Bounded insertion into the k best (distance, index) pairs seen so far.
    // Scanning in index order and inserting after equal distances keeps the
    // lower index first on ties.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, f) in scaled.iter().enumerate() {
        let d = config.metric.distance(&q, f);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, i));
        best.truncate(k);
    }

    let mut votes = [0usize; 2];
    for &(_, i) in &best {
        votes[labels[i].as_u8() as usize] += 1;
    }
    let label = match votes[1].cmp(&votes[0]) {
        std::cmp::Ordering::Greater => ClassLabel::SpikeWave,
        std::cmp::Ordering::Less => ClassLabel::Background,
        std::cmp::Ordering::Equal => labels[best[0].1],
    };
    Ok(Prediction {
        label,
        neighbor_indices: best.iter().map(|&(_, i)| i).collect(),
        neighbor_distances: best.iter().map(|&(d, _)| d).collect(),
    })
}

pub fn classify(
    query: &FeatureVector,
    dataset: &LabeledDataset,
    config: &KnnConfig,
) -> Result<Prediction, KnnError> {
    check(dataset, config)?;
    let scaled = scaled_features(dataset, &config.scaling);
    classify_scaled(query, &scaled, &dataset.labels, config)
}

/// Classifies every query in order; the error of the first failing query carries its index.
pub fn classify_batch(
    queries: &[FeatureVector],
    dataset: &LabeledDataset,
    config: &KnnConfig,
) -> Result<Vec<Prediction>, KnnError> {
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    check(dataset, config)?;
    let scaled = scaled_features(dataset, &config.scaling);
    queries
        .iter()
        .enumerate()
        .map(|(index, q)| {
            classify_scaled(q, &scaled, &dataset.labels, config).map_err(|e| KnnError::InBatch {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
