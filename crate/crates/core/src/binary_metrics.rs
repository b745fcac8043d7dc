//! Per-group confusion matrices and the confusion-matrix fairness metrics,
//! with parity-gap and disparity-ratio comparisons across groups.

use std::collections::BTreeMap;

use crate::error::{AuditError, Result};
use crate::model::{
    group_partition, AuditDataset, ComparisonMode, ConfusionMatrix, MetricId, MetricResult,
    MetricValue,
};

/// Confusion matrices keyed by group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedConfusions {
    per_group: BTreeMap<String, ConfusionMatrix>,
    threshold_used: Option<f64>,
}

impl GroupedConfusions {
    /// Builds from explicit matrices; needs at least two groups, each with at
    /// least one record.
    pub fn new(
        per_group: BTreeMap<String, ConfusionMatrix>,
        threshold_used: Option<f64>,
    ) -> Result<Self> {
        if per_group.len() < 2 {
            return Err(AuditError::SingleGroup(per_group.len()));
        }
        for (group, matrix) in &per_group {
            if matrix.total() == 0 {
                return Err(AuditError::EmptyGroup(group.clone()));
            }
        }
        Ok(Self {
            per_group,
            threshold_used,
        })
    }

    pub fn per_group(&self) -> &BTreeMap<String, ConfusionMatrix> {
        &self.per_group
    }

    pub fn threshold_used(&self) -> Option<f64> {
        self.threshold_used
    }

    pub fn groups(&self) -> impl Iterator<Item = &str> {
        self.per_group.keys().map(String::as_str)
    }

    /// True when no group shows a false positive or false negative.
    pub fn is_perfect_prediction(&self) -> bool {
        self.per_group.values().all(|m| m.fp == 0 && m.fn_ == 0)
    }
}

/// Counts TP/FP/TN/FN per group. Every record must carry a hard prediction
/// and the dataset must contain at least two groups.
pub fn confusion_by_group(dataset: &AuditDataset) -> Result<GroupedConfusions> {
    if dataset.group_keys().len() < 2 {
        return Err(AuditError::SingleGroup(dataset.group_keys().len()));
    }
    if let Some(idx) = dataset
        .records()
        .iter()
        .position(|r| r.predicted_outcome().is_none())
    {
        return Err(AuditError::MissingPrediction(idx));
    }
    let mut per_group = BTreeMap::new();
    for (group, records) in group_partition(dataset)? {
        let mut m = ConfusionMatrix::new(0, 0, 0, 0);
        for record in records {
            let predicted = record.predicted_outcome().expect("checked above");
            match (record.true_outcome(), predicted) {
                (true, true) => m.tp += 1,
                (false, true) => m.fp += 1,
                (false, false) => m.tn += 1,
                (true, false) => m.fn_ += 1,
            }
        }
        per_group.insert(group.to_string(), m);
    }
    GroupedConfusions::new(per_group, None)
}

/// As [`confusion_by_group`], recording the threshold that produced the
/// predictions.
pub fn confusion_by_group_at(
    dataset: &AuditDataset,
    threshold: f64,
) -> Result<GroupedConfusions> {
    let confusions = confusion_by_group(dataset)?;
    GroupedConfusions::new(confusions.per_group.clone(), Some(threshold))
}

fn rate_or_err(
    value: Option<f64>,
    group: &str,
    rate: &'static str,
) -> Result<f64> {
    value.ok_or_else(|| AuditError::UndefinedRate {
        group: group.to_string(),
        rate,
    })
}

/// Computes one confusion-matrix metric for every group and compares the
/// values under `mode` at `tolerance`.
///
/// Pair-valued metrics (EO, PP) are satisfied only when both components are
/// within tolerance.
pub fn binary_metric(
    metric_id: MetricId,
    confusions: &GroupedConfusions,
    tolerance: f64,
    mode: ComparisonMode,
) -> Result<MetricResult> {
    if !metric_id.is_binary() {
        return Err(AuditError::UnknownMetric(format!(
            "{metric_id} is not a confusion-matrix metric"
        )));
    }
    let mut per_group = BTreeMap::new();
    for (group, m) in confusions.per_group() {
        let value = match metric_id {
            MetricId::Eop => MetricValue::Scalar(rate_or_err(m.tpr(), group, "TPR")?),
            MetricId::Sp => {
                MetricValue::Scalar(rate_or_err(m.selection_rate(), group, "selection rate")?)
            }
            MetricId::Eo => MetricValue::Pair(
                rate_or_err(m.fpr(), group, "FPR")?,
                rate_or_err(m.fnr(), group, "FNR")?,
            ),
            MetricId::Pp => MetricValue::Pair(
                rate_or_err(m.ppv(), group, "PPV")?,
                rate_or_err(m.npv(), group, "NPV")?,
            ),
            MetricId::BgBacc => MetricValue::Scalar(rate_or_err(
                m.balanced_accuracy(),
                group,
                "balanced accuracy",
            )?),
            MetricId::BgAcc => {
                MetricValue::Scalar(rate_or_err(m.accuracy(), group, "accuracy")?)
            }
            MetricId::Emo => MetricValue::Scalar(rate_or_err(m.fpr(), group, "FPR")?),
            MetricId::Ao => {
                MetricValue::Scalar(rate_or_err(m.average_odds(), group, "average odds")?)
            }
            MetricId::BgF1 => MetricValue::Scalar(rate_or_err(m.f1(), group, "F1")?),
            _ => unreachable!("is_binary() checked above"),
        };
        per_group.insert(group.clone(), value);
    }
    Ok(MetricResult::from_values(
        metric_id, per_group, tolerance, mode,
    ))
}
