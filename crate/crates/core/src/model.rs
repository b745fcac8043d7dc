//! Shared immutable data types: audit records, datasets, confusion matrices,
//! and metric results.
//!
//! Everything here is value-semantic and immutable after construction, so all
//! types can be shared freely across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// One observation: a true outcome, the model's output for it, and the
/// group the individual belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRecord {
    true_outcome: bool,
    predicted_outcome: Option<bool>,
    score: Option<f64>,
    group: String,
    features: Option<Vec<f64>>,
}

impl AuditRecord {
    /// Builds a record, enforcing that at least one of `predicted_outcome` /
    /// `score` is present and that any score lies in [0, 1].
    pub fn new(
        true_outcome: bool,
        predicted_outcome: Option<bool>,
        score: Option<f64>,
        group: impl Into<String>,
        features: Option<Vec<f64>>,
    ) -> Result<Self> {
        if predicted_outcome.is_none() && score.is_none() {
            return Err(AuditError::InvalidRecord(
                "record needs a predicted outcome or a score".into(),
            ));
        }
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(AuditError::InvalidRecord(format!(
                    "score {s} is outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            true_outcome,
            predicted_outcome,
            score,
            group: group.into(),
            features,
        })
    }

    /// Record with a hard binary prediction and no score.
    pub fn with_prediction(
        true_outcome: bool,
        predicted_outcome: bool,
        group: impl Into<String>,
    ) -> Self {
        Self::new(true_outcome, Some(predicted_outcome), None, group, None)
            .expect("prediction present")
    }

    /// Record with a continuous score and no hard prediction.
    pub fn with_score(true_outcome: bool, score: f64, group: impl Into<String>) -> Result<Self> {
        Self::new(true_outcome, None, Some(score), group, None)
    }

    pub fn true_outcome(&self) -> bool {
        self.true_outcome
    }

    pub fn predicted_outcome(&self) -> Option<bool> {
        self.predicted_outcome
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn features(&self) -> Option<&[f64]> {
        self.features.as_deref()
    }

    /// Copy of this record with the prediction replaced.
    pub(crate) fn with_replaced_prediction(&self, predicted: bool) -> Self {
        Self {
            predicted_outcome: Some(predicted),
            ..self.clone()
        }
    }
}

/// Immutable table of [`AuditRecord`]s plus the derived group-key set.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditDataset {
    records: Vec<AuditRecord>,
    group_keys: BTreeSet<String>,
    feature_dimension: Option<usize>,
}

impl AuditDataset {
    /// Builds a dataset, checking that every record carrying features has the
    /// same feature dimension.
    pub fn new(records: Vec<AuditRecord>) -> Result<Self> {
        let mut feature_dimension = None;
        for (idx, record) in records.iter().enumerate() {
            if let Some(f) = record.features() {
                match feature_dimension {
                    None => feature_dimension = Some(f.len()),
                    Some(d) if d != f.len() => {
                        return Err(AuditError::InvalidRecord(format!(
                            "record {idx} has {} features, expected {d}",
                            f.len()
                        )));
                    }
                    _ => {}
                }
            }
        }
        let group_keys = records.iter().map(|r| r.group.clone()).collect();
        Ok(Self {
            records,
            group_keys,
            feature_dimension,
        })
    }

    pub fn records(&self) -> &[AuditRecord] {
        &self.records
    }

    pub fn group_keys(&self) -> &BTreeSet<String> {
        &self.group_keys
    }

    pub fn feature_dimension(&self) -> Option<usize> {
        self.feature_dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True when every record carries a score.
    pub fn has_scores(&self) -> bool {
        !self.is_empty() && self.records.iter().all(|r| r.score.is_some())
    }

    /// True when every record carries a hard prediction.
    pub fn has_predictions(&self) -> bool {
        !self.is_empty() && self.records.iter().all(|r| r.predicted_outcome.is_some())
    }

    /// True when every record carries a feature vector.
    pub fn has_features(&self) -> bool {
        !self.is_empty() && self.records.iter().all(|r| r.features.is_some())
    }
}

/// Splits a dataset by group key, preserving input order within each group.
///
/// Every record lands in exactly one partition and the partition keys equal
/// the dataset's group-key set.
pub fn group_partition(dataset: &AuditDataset) -> Result<BTreeMap<&str, Vec<&AuditRecord>>> {
    if dataset.is_empty() {
        return Err(AuditError::EmptyDataset);
    }
    let mut partition: BTreeMap<&str, Vec<&AuditRecord>> = BTreeMap::new();
    for record in dataset.records() {
        partition.entry(record.group()).or_default().push(record);
    }
    Ok(partition)
}

/// TP/FP/TN/FN counts for one group at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn rate(num: u64, den: u64) -> Option<f64> {
        (den > 0).then(|| num as f64 / den as f64)
    }

    /// True positive rate TP/(TP+FN); `None` when no positives exist.
    pub fn tpr(&self) -> Option<f64> {
        Self::rate(self.tp, self.tp + self.fn_)
    }

    /// False positive rate FP/(TN+FP).
    pub fn fpr(&self) -> Option<f64> {
        Self::rate(self.fp, self.tn + self.fp)
    }

    /// False negative rate FN/(TP+FN).
    pub fn fnr(&self) -> Option<f64> {
        Self::rate(self.fn_, self.tp + self.fn_)
    }

    /// True negative rate (specificity) TN/(TN+FP).
    pub fn tnr(&self) -> Option<f64> {
        Self::rate(self.tn, self.tn + self.fp)
    }

    /// Positive predictive value TP/(TP+FP).
    pub fn ppv(&self) -> Option<f64> {
        Self::rate(self.tp, self.tp + self.fp)
    }

    /// Negative predictive value TN/(TN+FN).
    pub fn npv(&self) -> Option<f64> {
        Self::rate(self.tn, self.tn + self.fn_)
    }

    /// Fraction of records predicted positive, (TP+FP)/total.
    pub fn selection_rate(&self) -> Option<f64> {
        Self::rate(self.tp + self.fp, self.total())
    }

    /// (TP+TN)/total.
    pub fn accuracy(&self) -> Option<f64> {
        Self::rate(self.tp + self.tn, self.total())
    }

    /// Mean of recall and specificity.
    pub fn balanced_accuracy(&self) -> Option<f64> {
        Some(0.5 * (self.tpr()? + self.tnr()?))
    }

    /// F1 from PPV and TPR; 0 when both are 0 (no true positives possible).
    pub fn f1(&self) -> Option<f64> {
        let p = self.ppv()?;
        let r = self.tpr()?;
        if p + r == 0.0 {
            Some(0.0)
        } else {
            Some(2.0 * p * r / (p + r))
        }
    }

    /// Mean of FPR and TPR.
    pub fn average_odds(&self) -> Option<f64> {
        Some(0.5 * (self.fpr()? + self.tpr()?))
    }
}

/// Identifier for every fairness metric the library computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricId {
    /// Equal opportunity: cross-group TPR comparison.
    #[serde(rename = "EOP")]
    Eop,
    /// Statistical parity: positive-prediction (selection) rate comparison.
    #[serde(rename = "SP")]
    Sp,
    /// Equalized odds: joint FPR and FNR comparison.
    #[serde(rename = "EO")]
    Eo,
    /// Predictive parity: joint PPV and NPV comparison.
    #[serde(rename = "PP")]
    Pp,
    /// Balanced-accuracy comparison.
    #[serde(rename = "BG_BACC")]
    BgBacc,
    /// Accuracy comparison.
    #[serde(rename = "BG_ACC")]
    BgAcc,
    /// Equal mis-opportunity (predictive equality): FPR comparison.
    #[serde(rename = "EMO")]
    Emo,
    /// Average odds: mean of FPR and TPR, compared across groups.
    #[serde(rename = "AO")]
    Ao,
    /// F1-score comparison.
    #[serde(rename = "BG_F1")]
    BgF1,
    /// ROC-AUC comparison.
    #[serde(rename = "BG_AUC")]
    BgAuc,
    /// Precision-recall-AUC comparison.
    #[serde(rename = "BG_AUPRC")]
    BgAuprc,
    /// Calibration error comparison.
    #[serde(rename = "CAL")]
    Cal,
    /// Mean score over the positive class, compared across groups.
    #[serde(rename = "BAL_POS")]
    BalPos,
    /// Mean score over the negative class, compared across groups.
    #[serde(rename = "BAL_NEG")]
    BalNeg,
    /// Both class balances jointly.
    #[serde(rename = "BAL")]
    Bal,
    /// Fairness through awareness: k-nearest-neighbour prediction consistency.
    #[serde(rename = "FTA")]
    Fta,
}

impl MetricId {
    /// All metric ids in canonical order.
    pub const ALL: [MetricId; 16] = [
        MetricId::Eop,
        MetricId::Sp,
        MetricId::Eo,
        MetricId::Pp,
        MetricId::BgBacc,
        MetricId::BgAcc,
        MetricId::Emo,
        MetricId::Ao,
        MetricId::BgF1,
        MetricId::BgAuc,
        MetricId::BgAuprc,
        MetricId::Cal,
        MetricId::BalPos,
        MetricId::BalNeg,
        MetricId::Bal,
        MetricId::Fta,
    ];

    /// The canonical upper-case name, as accepted on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            MetricId::Eop => "EOP",
            MetricId::Sp => "SP",
            MetricId::Eo => "EO",
            MetricId::Pp => "PP",
            MetricId::BgBacc => "BG_BACC",
            MetricId::BgAcc => "BG_ACC",
            MetricId::Emo => "EMO",
            MetricId::Ao => "AO",
            MetricId::BgF1 => "BG_F1",
            MetricId::BgAuc => "BG_AUC",
            MetricId::BgAuprc => "BG_AUPRC",
            MetricId::Cal => "CAL",
            MetricId::BalPos => "BAL_POS",
            MetricId::BalNeg => "BAL_NEG",
            MetricId::Bal => "BAL",
            MetricId::Fta => "FTA",
        }
    }

    /// Names of the value components this metric carries per group.
    pub fn component_names(&self) -> &'static [&'static str] {
        match self {
            MetricId::Eop => &["tpr"],
            MetricId::Sp => &["selection_rate"],
            MetricId::Eo => &["fpr", "fnr"],
            MetricId::Pp => &["ppv", "npv"],
            MetricId::BgBacc => &["balanced_accuracy"],
            MetricId::BgAcc => &["accuracy"],
            MetricId::Emo => &["fpr"],
            MetricId::Ao => &["average_odds"],
            MetricId::BgF1 => &["f1"],
            MetricId::BgAuc => &["auc"],
            MetricId::BgAuprc => &["auprc"],
            MetricId::Cal => &["calibration_error"],
            MetricId::BalPos => &["mean_score_positive"],
            MetricId::BalNeg => &["mean_score_negative"],
            MetricId::Bal => &["mean_score_positive", "mean_score_negative"],
            MetricId::Fta => &["consistency"],
        }
    }

    /// Metrics computed from hard binary predictions (confusion matrices).
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            MetricId::Eop
                | MetricId::Sp
                | MetricId::Eo
                | MetricId::Pp
                | MetricId::BgBacc
                | MetricId::BgAcc
                | MetricId::Emo
                | MetricId::Ao
                | MetricId::BgF1
        )
    }

    /// Metrics computed from continuous scores.
    pub fn is_score_based(&self) -> bool {
        matches!(
            self,
            MetricId::BgAuc | MetricId::BgAuprc | MetricId::Cal | MetricId::BalPos
                | MetricId::BalNeg
                | MetricId::Bal
        )
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let canon = s.trim().to_ascii_uppercase().replace('-', "_");
        MetricId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == canon)
            .ok_or_else(|| AuditError::UnknownMetric(s.to_string()))
    }
}

/// How per-group values are compared: absolute differences or ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonMode {
    /// Satisfied when the largest pairwise absolute difference is within tolerance.
    Parity,
    /// Satisfied when the smallest pairwise smaller/larger ratio is at least 1 − tolerance.
    Disparity,
}

impl fmt::Display for ComparisonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparisonMode::Parity => f.write_str("parity"),
            ComparisonMode::Disparity => f.write_str("disparity"),
        }
    }
}

/// A metric's value for one group: a scalar, or a pair for the set-valued
/// metrics (EO, PP, BAL).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Scalar(f64),
    Pair(f64, f64),
}

impl MetricValue {
    pub fn components(&self) -> Vec<f64> {
        match *self {
            MetricValue::Scalar(v) => vec![v],
            MetricValue::Pair(a, b) => vec![a, b],
        }
    }
}

/// Per-group values for one metric plus the cross-group comparison verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub metric_id: MetricId,
    pub per_group: BTreeMap<String, MetricValue>,
    /// Largest pairwise absolute difference (component-wise maximum for pairs).
    pub parity_gap: f64,
    /// Smallest pairwise smaller/larger ratio (component-wise minimum for
    /// pairs); `None` when a component is zero in every group.
    pub disparity_ratio: Option<f64>,
    pub mode: ComparisonMode,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl MetricResult {
    /// Builds a result from per-group values, computing the gap, the ratio,
    /// and the verdict under the requested mode.
    pub fn from_values(
        metric_id: MetricId,
        per_group: BTreeMap<String, MetricValue>,
        tolerance: f64,
        mode: ComparisonMode,
    ) -> Self {
        let n_components = per_group
            .values()
            .next()
            .map(|v| v.components().len())
            .unwrap_or(1);
        let mut parity_gap = 0.0f64;
        let mut ratio: Option<f64> = Some(1.0);
        for c in 0..n_components {
            let series: Vec<f64> = per_group.values().map(|v| v.components()[c]).collect();
            parity_gap = parity_gap.max(series_gap(&series));
            ratio = match (ratio, series_ratio(&series)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
        }
        let satisfied = match mode {
            ComparisonMode::Parity => parity_gap <= tolerance,
            ComparisonMode::Disparity => ratio.is_some_and(|r| r >= 1.0 - tolerance),
        };
        Self {
            metric_id,
            per_group,
            parity_gap,
            disparity_ratio: ratio,
            mode,
            tolerance,
            satisfied,
        }
    }
}

/// Max pairwise |vᵢ − vⱼ| over a series, i.e. max − min.
fn series_gap(series: &[f64]) -> f64 {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    if series.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Min pairwise min/max ratio over a series. Pairs where both values are
/// zero are skipped as trivially equal; `None` when every value is zero.
fn series_ratio(series: &[f64]) -> Option<f64> {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if series.is_empty() || max <= 0.0 {
        return None;
    }
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    Some(min / max)
}
