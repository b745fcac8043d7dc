//! Individual fairness via k-nearest-neighbour prediction consistency:
//! similar individuals should receive similar predictions.

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::model::AuditDataset;

/// Where the per-record prediction value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// Use the score when every record has one, else the hard prediction.
    Auto,
    PredictedOutcome,
    Score,
}

/// Feature-space preprocessing before distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Rescale each feature to [0, 1] over the dataset; constant features
    /// collapse to 0.
    PerFeatureMinMax,
    None,
}

/// Configuration for the consistency computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnncConfig {
    /// Number of neighbours; must satisfy 1 <= k < dataset size.
    pub k: usize,
    pub normalization: Normalization,
    pub prediction_source: PredictionSource,
}

impl Default for KnncConfig {
    fn default() -> Self {
        Self {
            k: 5,
            normalization: Normalization::PerFeatureMinMax,
            prediction_source: PredictionSource::Auto,
        }
    }
}

impl KnncConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

/// Consistency score in [0, 1]: 1 − the mean absolute deviation of each
/// prediction from the mean prediction of its k nearest neighbours
/// (Euclidean distance, self excluded, distance ties broken by lowest
/// record index). 1 means individually fair.
pub fn knn_consistency(dataset: &AuditDataset, config: &KnncConfig) -> Result<f64> {
    let n = dataset.len();
    if config.k < 1 || config.k >= n {
        return Err(AuditError::KTooLarge { k: config.k, n });
    }
    if let Some(idx) = dataset
        .records()
        .iter()
        .position(|r| r.features().is_none())
    {
        return Err(AuditError::MissingFeatures(idx));
    }
    let predictions = prediction_values(dataset, config.prediction_source)?;
    let features = normalized_features(dataset, config.normalization);

    let mut deviation_sum = 0.0;
    for i in 0..n {
        // nearest k by (distance, index); the index part makes ties deterministic
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (squared_distance(&features[i], &features[j]), j))
            .collect();
        candidates
            .select_nth_unstable_by(config.k - 1, |a, b| a.partial_cmp(b).expect("finite"));
        let neighbour_mean: f64 = candidates[..config.k]
            .iter()
            .map(|&(_, j)| predictions[j])
            .sum::<f64>()
            / config.k as f64;
        deviation_sum += (predictions[i] - neighbour_mean).abs();
    }
    Ok(1.0 - deviation_sum / n as f64)
}

fn prediction_values(dataset: &AuditDataset, source: PredictionSource) -> Result<Vec<f64>> {
    let use_scores = match source {
        PredictionSource::Score => true,
        PredictionSource::PredictedOutcome => false,
        PredictionSource::Auto => dataset.has_scores(),
    };
    dataset
        .records()
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            if use_scores {
                r.score().ok_or(AuditError::MissingScore(idx))
            } else {
                r.predicted_outcome()
                    .map(|p| if p { 1.0 } else { 0.0 })
                    .ok_or(AuditError::MissingPrediction(idx))
            }
        })
        .collect()
}

fn normalized_features(dataset: &AuditDataset, normalization: Normalization) -> Vec<Vec<f64>> {
    let raw: Vec<&[f64]> = dataset
        .records()
        .iter()
        .map(|r| r.features().expect("features checked by caller"))
        .collect();
    match normalization {
        Normalization::None => raw.iter().map(|f| f.to_vec()).collect(),
        Normalization::PerFeatureMinMax => {
            let dim = raw.first().map(|f| f.len()).unwrap_or(0);
            let mut mins = vec![f64::INFINITY; dim];
            let mut maxs = vec![f64::NEG_INFINITY; dim];
            for f in &raw {
                for d in 0..dim {
                    mins[d] = mins[d].min(f[d]);
                    maxs[d] = maxs[d].max(f[d]);
                }
            }
            raw.iter()
                .map(|f| {
                    (0..dim)
                        .map(|d| {
                            let range = maxs[d] - mins[d];
                            if range > 0.0 {
                                (f[d] - mins[d]) / range
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Squared Euclidean distance; ordering-equivalent to the true distance.
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
