//! Precision, recall and F1 of a predicted mask, and summaries over runs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Confusion counts over dimensions. Precision is 1 when nothing is
/// selected and recall is 1 when the truth is empty.
pub fn score_mask(predicted: &[bool], truth: &[bool]) -> Result<BoundaryScore> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "predicted mask has length {}, truth has length {}",
            predicted.len(),
            truth.len()
        )));
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(BoundaryScore { precision, recall, f1, true_positives: tp, false_positives: fp, false_negatives: fn_ })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for one value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("cannot summarize an empty list"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub n: usize,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
}

pub fn aggregate(scores: &[BoundaryScore]) -> Result<ScoreSummary> {
    let field = |f: fn(&BoundaryScore) -> f64| MeanStd::of(&scores.iter().map(f).collect::<Vec<_>>());
    Ok(ScoreSummary {
        n: scores.len(),
        precision: field(|s| s.precision)?,
        recall: field(|s| s.recall)?,
        f1: field(|s| s.f1)?,
    })
}
