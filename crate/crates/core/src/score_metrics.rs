//! Score-based (regressive) group metrics: ROC-AUC, PR-AUC, calibration
//! error, and class balance, each compared across groups.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::model::{
    group_partition, AuditDataset, AuditRecord, ComparisonMode, MetricId, MetricResult,
    MetricValue,
};

/// Binning configuration for the calibration metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Number of equal-width bins over [0, 1]; a score of exactly 1.0 falls
    /// into the top bin.
    pub bin_count: usize,
}

impl CalibrationConfig {
    pub fn new(bin_count: usize) -> Result<Self> {
        if bin_count < 2 {
            return Err(AuditError::InvalidSchema(format!(
                "calibration needs at least 2 bins, got {bin_count}"
            )));
        }
        Ok(Self { bin_count })
    }
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { bin_count: 10 }
    }
}

/// Which true class the balance metric averages scores over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceClass {
    Positive,
    Negative,
    /// Both classes; satisfied only when both are within tolerance.
    Overall,
}

fn scored_groups(dataset: &AuditDataset) -> Result<BTreeMap<&str, Vec<&AuditRecord>>> {
    if dataset.group_keys().len() < 2 {
        return Err(AuditError::SingleGroup(dataset.group_keys().len()));
    }
    if let Some(idx) = dataset.records().iter().position(|r| r.score().is_none()) {
        return Err(AuditError::MissingScore(idx));
    }
    group_partition(dataset)
}

/// Splits one group's records into positive-class and negative-class scores.
fn class_scores(records: &[&AuditRecord]) -> (Vec<f64>, Vec<f64>) {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for r in records {
        let s = r.score().expect("scores checked by caller");
        if r.true_outcome() {
            positives.push(s);
        } else {
            negatives.push(s);
        }
    }
    (positives, negatives)
}

/// Mann–Whitney AUC via average ranks; tied scores count one half.
fn auc_rank(positives: &[f64], negatives: &[f64]) -> f64 {
    let p = positives.len();
    let n = negatives.len();
    let mut pooled: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores are finite"));

    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks are 1-based; tied entries share the mean rank of their block
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        for entry in &pooled[i..j] {
            if entry.1 {
                positive_rank_sum += mean_rank;
            }
        }
        i = j;
    }
    (positive_rank_sum - (p * (p + 1)) as f64 / 2.0) / (p as f64 * n as f64)
}

/// Area under the PR curve by average-precision summation over descending
/// unique score thresholds: Σ (Rₖ − Rₖ₋₁)·Pₖ.
fn auprc_steps(positives: &[f64], negatives: &[f64]) -> f64 {
    let total_positives = positives.len() as f64;
    let mut pooled: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));

    let mut area = 0.0;
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut last_recall = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            if pooled[j].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let recall = tp as f64 / total_positives;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - last_recall) * precision;
        last_recall = recall;
        i = j;
    }
    area
}

/// Per-group ROC-AUC: the probability that a random positive outscores a
/// random negative, ties counting one half.
pub fn auc_by_group(
    dataset: &AuditDataset,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    ranking_metric(dataset, MetricId::BgAuc, auc_rank, tolerance, mode)
}

/// Per-group area under the precision-recall curve.
pub fn auprc_by_group(
    dataset: &AuditDataset,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    ranking_metric(dataset, MetricId::BgAuprc, auprc_steps, tolerance, mode)
}

fn ranking_metric(
    dataset: &AuditDataset,
    metric_id: MetricId,
    f: impl Fn(&[f64], &[f64]) -> f64,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    let mut per_group = BTreeMap::new();
    for (group, records) in scored_groups(dataset)? {
        let (positives, negatives) = class_scores(&records);
        if positives.is_empty() {
            return Err(AuditError::DegenerateGroup {
                group: group.to_string(),
                class: "positive",
            });
        }
        if negatives.is_empty() {
            return Err(AuditError::DegenerateGroup {
                group: group.to_string(),
                class: "negative",
            });
        }
        per_group.insert(
            group.to_string(),
            MetricValue::Scalar(f(&positives, &negatives)),
        );
    }
    Ok(MetricResult::from_values(
        metric_id, per_group, tolerance, mode,
    ))
}

/// Per-group calibration error: the mean over populated bins of
/// |mean score − empirical positive rate|. Lower is better calibrated.
pub fn calibration_by_group(
    dataset: &AuditDataset,
    config: &CalibrationConfig,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    let bins = config.bin_count;
    if bins < 2 {
        return Err(AuditError::InvalidSchema(format!(
            "calibration needs at least 2 bins, got {bins}"
        )));
    }
    let mut per_group = BTreeMap::new();
    for (group, records) in scored_groups(dataset)? {
        let mut score_sum = vec![0.0f64; bins];
        let mut outcome_sum = vec![0.0f64; bins];
        let mut count = vec![0usize; bins];
        for r in &records {
            let s = r.score().expect("scores checked");
            let idx = ((s * bins as f64) as usize).min(bins - 1);
            score_sum[idx] += s;
            outcome_sum[idx] += if r.true_outcome() { 1.0 } else { 0.0 };
            count[idx] += 1;
        }
        let populated: Vec<usize> = (0..bins).filter(|&b| count[b] > 0).collect();
        if populated.is_empty() {
            return Err(AuditError::NoBinsPopulated(group.to_string()));
        }
        let total_gap: f64 = populated
            .iter()
            .map(|&b| {
                let n = count[b] as f64;
                (score_sum[b] / n - outcome_sum[b] / n).abs()
            })
            .sum();
        per_group.insert(
            group.to_string(),
            MetricValue::Scalar(total_gap / populated.len() as f64),
        );
    }
    Ok(MetricResult::from_values(
        MetricId::Cal,
        per_group,
        tolerance,
        mode,
    ))
}

/// Per-group mean score over the chosen true class; `Overall` carries both
/// class means and is satisfied only when both are within tolerance.
pub fn balance_by_group(
    dataset: &AuditDataset,
    which: BalanceClass,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    let metric_id = match which {
        BalanceClass::Positive => MetricId::BalPos,
        BalanceClass::Negative => MetricId::BalNeg,
        BalanceClass::Overall => MetricId::Bal,
    };
    let mut per_group = BTreeMap::new();
    for (group, records) in scored_groups(dataset)? {
        let (positives, negatives) = class_scores(&records);
        let mean = |scores: &[f64]| scores.iter().sum::<f64>() / scores.len() as f64;
        let need_positive = matches!(which, BalanceClass::Positive | BalanceClass::Overall);
        let need_negative = matches!(which, BalanceClass::Negative | BalanceClass::Overall);
        if need_positive && positives.is_empty() {
            return Err(AuditError::DegenerateGroup {
                group: group.to_string(),
                class: "positive",
            });
        }
        if need_negative && negatives.is_empty() {
            return Err(AuditError::DegenerateGroup {
                group: group.to_string(),
                class: "negative",
            });
        }
        let value = match which {
            BalanceClass::Positive => MetricValue::Scalar(mean(&positives)),
            BalanceClass::Negative => MetricValue::Scalar(mean(&negatives)),
            BalanceClass::Overall => MetricValue::Pair(mean(&positives), mean(&negatives)),
        };
        per_group.insert(group.to_string(), value);
    }
    Ok(MetricResult::from_values(
        metric_id, per_group, tolerance, mode,
    ))
}
