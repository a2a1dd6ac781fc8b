use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataprep::LabeledSet;
use crate::error::{ensure_len, Error, Result};
use crate::hybrid::{predict, Model};

/// Counts with fraud (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn tally(predicted: &[u8], actual: &[u8]) -> Result<Self> {
        ensure_len("predictions vs labels", actual.len(), predicted.len())?;
        let mut cm = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (1, 1) => cm.tp += 1,
                (1, 0) => cm.fp += 1,
                (0, 0) => cm.tn += 1,
                (0, 1) => cm.fn_ += 1,
                _ => return Err(Error::InvalidArgument(format!("labels must be 0 or 1, got ({p}, {a})"))),
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, precision, recall and F1. A zero denominator yields 0.
pub fn metrics_from_cm(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub metrics: Metrics,
    pub confusion_matrix: ConfusionMatrix,
    pub inference_seconds: f64,
}

/// Eval-mode metrics of `model` on `set`, timing the forward pass and thresholding.
pub fn evaluate(model: &Model, set: &LabeledSet, threshold: f64) -> Result<MetricsReport> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    let start = Instant::now();
    let logits = model.logits(set.features.view())?;
    let predicted = predict(&logits, threshold)?;
    let inference_seconds = start.elapsed().as_secs_f64();
    let cm = ConfusionMatrix::tally(&predicted, &set.labels)?;
    Ok(MetricsReport {
        metrics: metrics_from_cm(&cm)?,
        confusion_matrix: cm,
        inference_seconds,
    })
}
