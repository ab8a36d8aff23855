//! Binary confusion matrix and the rates derived from it.

use thiserror::Error;

use crate::signal_io::ClassLabel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{predicted} predictions but {actual} ground-truth labels")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
}

/// Counts with label 1 (spike-and-wave) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, tn: usize, fp: usize, fn_: usize) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// A rate that is undefined when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Defined(f64),
    Undefined,
}

impl Rate {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Rate::Undefined
        } else {
            Rate::Defined(num as f64 / den as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Defined(v) => Some(v),
            Rate::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub accuracy: f64,
    pub sensitivity: Rate,
    pub specificity: Rate,
}

pub fn confusion(
    predicted: &[ClassLabel],
    actual: &[ClassLabel],
) -> Result<ConfusionMatrix, MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (p, a) in predicted.iter().zip(actual) {
        match (p, a) {
            (ClassLabel::SpikeWave, ClassLabel::SpikeWave) => cm.tp += 1,
            (ClassLabel::Background, ClassLabel::Background) => cm.tn += 1,
            (ClassLabel::SpikeWave, ClassLabel::Background) => cm.fp += 1,
            (ClassLabel::Background, ClassLabel::SpikeWave) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn rates(cm: &ConfusionMatrix) -> Result<Rates, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(Rates {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        sensitivity: Rate::ratio(cm.tp, cm.tp + cm.fn_),
        specificity: Rate::ratio(cm.tn, cm.tn + cm.fp),
    })
}
