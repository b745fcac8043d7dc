//! Data conditions that constrain which fairness metrics are meaningful:
//! per-group base rates, dataset balance, the four-fifths selection-rate
//! rule, and warnings for metric combinations that cannot hold together
//! under the measured conditions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::binary_metrics::GroupedConfusions;
use crate::error::{AuditError, Result};
use crate::model::{group_partition, AuditDataset, MetricId};

/// Measured data conditions, with the tolerances that produced each verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataDiagnostics {
    /// Fraction of positive true outcomes per group.
    pub base_rate_per_group: BTreeMap<String, f64>,
    /// True when the largest pairwise base-rate gap is within `delta_base_rate`.
    pub base_rates_equal: bool,
    pub delta_base_rate: f64,
    /// Fraction of positive true outcomes overall.
    pub positive_fraction: f64,
    /// True when `positive_fraction` is within `delta_balance` of one half.
    pub dataset_balanced: bool,
    pub delta_balance: f64,
    /// Lowest pairwise ratio of group selection rates; `None` without
    /// predictions or when every selection rate is zero.
    pub four_fifths_ratio: Option<f64>,
    ///`four_fifths_ratio >= 0.8` (boundary inclusive).
    pub four_fifths_pass: Option<bool>,
    /// True when predictions exist and no group shows any misclassification;
    /// `None` without predictions.
    pub perfect_prediction: Option<bool>,
}

/// Measures base rates, balance, and (when predictions exist) the
/// four-fifths ratio and prediction perfection.
pub fn diagnose(dataset: &AuditDataset, delta_base_rate: f64, delta_balance: f64) -> Result<DataDiagnostics> {
    if dataset.group_keys().len() < 2 {
        return Err(AuditError::SingleGroup(dataset.group_keys().len()));
    }
    let partition = group_partition(dataset)?;
    let mut base_rate_per_group = BTreeMap::new();
    for (group, records) in &partition {
        if records.is_empty() {
            return Err(AuditError::EmptyGroup(group.to_string()));
        }
        let positives = records.iter().filter(|r| r.true_outcome()).count();
        base_rate_per_group.insert(group.to_string(), positives as f64 / records.len() as f64);
    }
    let max_rate = base_rate_per_group.values().copied().fold(0.0, f64::max);
    let min_rate = base_rate_per_group
        .values()
        .copied()
        .fold(1.0, f64::min);
    let base_rates_equal = max_rate - min_rate <= delta_base_rate;

    let positives_total = dataset.records().iter().filter(|r| r.true_outcome()).count();
    let positive_fraction = positives_total as f64 / dataset.len() as f64;
    let dataset_balanced = (positive_fraction - 0.5).abs() <= delta_balance;

    let (four_fifths_ratio, four_fifths_pass, perfect_prediction) = if dataset.has_predictions() {
        let confusions = crate::binary_metrics::confusion_by_group(dataset)?;
        let perfect = confusions.is_perfect_prediction();
        match four_fifths_check(&confusions) {
            Ok((ratio, pass)) => (Some(ratio), Some(pass), Some(perfect)),
            Err(AuditError::ZeroSelectionEverywhere) => (None, None, Some(perfect)),
            Err(e) => return Err(e),
        }
    } else {
        (None, None, None)
    };

    Ok(DataDiagnostics {
        base_rate_per_group,
        base_rates_equal,
        delta_base_rate,
        positive_fraction,
        dataset_balanced,
        delta_balance,
        four_fifths_ratio,
        four_fifths_pass,
        perfect_prediction,
    })
}

/// Adverse-impact check: the lowest pairwise ratio of group selection rates
/// (TP+FP over total) must reach four fifths. The 0.8 boundary passes.
pub fn four_fifths_check(confusions: &GroupedConfusions) -> Result<(f64, bool)> {
    let rates: Vec<f64> = confusions
        .per_group()
        .values()
        .map(|m| m.selection_rate().expect("matrices are non-empty"))
        .collect();
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(AuditError::ZeroSelectionEverywhere);
    }
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = min / max;
    Ok((ratio, ratio >= 0.8))
}

/// When a rule's metric set cannot jointly hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IncompatCondition {
    /// Holds whenever group base rates differ beyond tolerance.
    UnequalBaseRates,
    /// Holds whenever the model misclassifies anything (assumed when unknown).
    ImperfectPrediction,
    /// Holds unless predictions are perfect or base rates are equal.
    AlwaysUnlessPerfectOrEqualRates,
}

/// A metric combination that cannot be jointly satisfied under a condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncompatibilityRule {
    pub metric_set: BTreeSet<MetricId>,
    pub condition: IncompatCondition,
    pub citation: &'static str,
    pub statement: &'static str,
}

fn rule(
    metrics: &[MetricId],
    condition: IncompatCondition,
    citation: &'static str,
    statement: &'static str,
) -> IncompatibilityRule {
    IncompatibilityRule {
        metric_set: metrics.iter().copied().collect(),
        condition,
        citation,
        statement,
    }
}

/// The built-in incompatibility catalog. Order matters: for a given metric
/// set, the first rule whose condition holds is the one reported.
pub fn rule_catalog() -> Vec<IncompatibilityRule> {
    use IncompatCondition::*;
    use MetricId::*;
    vec![
        rule(
            &[Eo, Pp],
            UnequalBaseRates,
            "Chouldechova (2017)",
            "predictive parity and equalized odds cannot hold together when group base rates differ",
        ),
        rule(
            &[Eo, Pp],
            ImperfectPrediction,
            "Barocas et al. (2019); Wasserman (2004)",
            "negative predictive value parity and equalized odds cannot hold together unless the model is perfectly predictive",
        ),
        rule(
            &[Cal, Eo],
            AlwaysUnlessPerfectOrEqualRates,
            "Kleinberg et al. (2016); Pleiss et al. (2017)",
            "calibration and equalized odds cannot hold together unless predictions are perfect or base rates are equal",
        ),
        rule(
            &[Sp, BgAcc],
            UnequalBaseRates,
            "Hedden (2021)",
            "statistical parity and group accuracy parity cannot hold together when base rates are unequal",
        ),
        rule(
            &[Sp, Eo],
            ImperfectPrediction,
            "Hedden (2021)",
            "statistical parity and equalized odds cannot hold together unless predictions are perfect",
        ),
        rule(
            &[Sp, Eo, Pp],
            UnequalBaseRates,
            "Garg et al. (2020)",
            "statistical parity, equalized odds, and predictive parity are jointly incompatible unless base rates are uniform",
        ),
    ]
}

/// One fired rule, ready for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncompatibilityWarning {
    pub metrics: Vec<MetricId>,
    pub condition: IncompatCondition,
    pub citation: String,
    pub message: String,
}

fn condition_holds(condition: IncompatCondition, diag: &DataDiagnostics) -> bool {
    // Prediction quality is assumed imperfect when no predictions were seen.
    let perfect = diag.perfect_prediction.unwrap_or(false);
    match condition {
        IncompatCondition::UnequalBaseRates => !diag.base_rates_equal,
        IncompatCondition::ImperfectPrediction => !perfect,
        IncompatCondition::AlwaysUnlessPerfectOrEqualRates => {
            !(perfect || diag.base_rates_equal)
        }
    }
}

/// Metrics whose satisfaction follows from a requested metric: equalized
/// odds pins the FNR, hence the TPR, so it carries equal opportunity.
fn implied(requested: &BTreeSet<MetricId>) -> BTreeSet<MetricId> {
    let mut expanded = requested.clone();
    if expanded.contains(&MetricId::Eo) {
        expanded.insert(MetricId::Eop);
    }
    expanded
}

/// Walks the rule catalog and reports every combination among the requested
/// (or implied) metrics whose condition holds under `diag`. At most one
/// warning fires per metric set: the earliest applicable rule wins.
pub fn incompatibility_report(
    requested: &BTreeSet<MetricId>,
    diag: &DataDiagnostics,
) -> Vec<IncompatibilityWarning> {
    let expanded = implied(requested);
    let mut warned_sets: Vec<&BTreeSet<MetricId>> = Vec::new();
    let catalog = rule_catalog();
    let mut warnings = Vec::new();
    for rule in &catalog {
        if !rule.metric_set.is_subset(&expanded) {
            continue;
        }
        if warned_sets.contains(&&rule.metric_set) {
            continue;
        }
        if !condition_holds(rule.condition, diag) {
            continue;
        }
        warnings.push(IncompatibilityWarning {
            metrics: rule.metric_set.iter().copied().collect(),
            condition: rule.condition,
            citation: rule.citation.to_string(),
            message: rule.statement.to_string(),
        });
        warned_sets.push(&rule.metric_set);
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AuditRecord, ConfusionMatrix};

    fn grant_dataset() -> AuditDataset {
        let mut records = Vec::new();
        let mut push = |n: usize, y: bool, yhat: bool, g: &str| {
            for _ in 0..n {
                records.push(AuditRecord::with_prediction(y, yhat, g));
            }
        };
        push(90, true, true, "G1");
        push(10, false, true, "G1");
        push(9, false, false, "G1");
        push(1, true, false, "G1");
        push(9, true, true, "G2");
        push(1, false, true, "G2");
        push(90, false, false, "G2");
        push(10, true, false, "G2");
        AuditDataset::new(records).unwrap()
    }

    fn diag_with(base_rates_equal: bool, perfect: Option<bool>) -> DataDiagnostics {
        DataDiagnostics {
            base_rate_per_group: BTreeMap::new(),
            base_rates_equal,
            delta_base_rate: 0.05,
            positive_fraction: 0.5,
            dataset_balanced: true,
            delta_balance: 0.05,
            four_fifths_ratio: None,
            four_fifths_pass: None,
            perfect_prediction: perfect,
        }
    }

    #[test]
    fn grant_base_rates_are_unequal() {
        let d = diagnose(&grant_dataset(), 0.05, 0.05).unwrap();
        assert!((d.base_rate_per_group["G1"] - 91.0 / 110.0).abs() < 1e-12);
        assert!((d.base_rate_per_group["G2"] - 19.0 / 110.0).abs() < 1e-12);
        assert!(!d.base_rates_equal);
        assert_eq!(d.perfect_prediction, Some(false));
    }

    #[test]
    fn symmetric_half_positive_data_is_balanced_and_equal() {
        let mut records = Vec::new();
        for g in ["A", "B"] {
            for _ in 0..5 {
                records.push(AuditRecord::with_prediction(true, true, g));
                records.push(AuditRecord::with_prediction(false, false, g));
            }
        }
        let d = diagnose(&AuditDataset::new(records).unwrap(), 0.05, 0.05).unwrap();
        assert!(d.base_rates_equal);
        assert!(d.dataset_balanced);
        assert_eq!(d.positive_fraction, 0.5);
        assert_eq!(d.four_fifths_pass, Some(true));
    }

    #[test]
    fn ninety_percent_positive_data_is_unbalanced() {
        let mut records = Vec::new();
        for g in ["A", "B"] {
            for _ in 0..45 {
                records.push(AuditRecord::with_prediction(true, true, g));
            }
            for _ in 0..5 {
                records.push(AuditRecord::with_prediction(false, false, g));
            }
        }
        let d = diagnose(&AuditDataset::new(records).unwrap(), 0.05, 0.05).unwrap();
        assert_eq!(d.positive_fraction, 0.9);
        assert!(!d.dataset_balanced);
    }

    #[test]
    fn four_fifths_on_admission_style_rates() {
        // selection rates 0.443 vs 0.346 -> ratio just under 0.8
        let mut per_group = BTreeMap::new();
        per_group.insert("men".to_string(), ConfusionMatrix::new(443, 0, 557, 0));
        per_group.insert("women".to_string(), ConfusionMatrix::new(346, 0, 654, 0));
        let confusions = GroupedConfusions::new(per_group, None).unwrap();
        let (ratio, pass) = four_fifths_check(&confusions).unwrap();
        assert!((ratio - 0.346 / 0.443).abs() < 1e-9);
        assert!((ratio - 0.781).abs() < 1e-3);
        assert!(!pass);
    }

    #[test]
    fn four_fifths_boundary_is_inclusive() {
        let mut per_group = BTreeMap::new();
        per_group.insert("A".to_string(), ConfusionMatrix::new(5, 0, 5, 0));
        per_group.insert("B".to_string(), ConfusionMatrix::new(4, 0, 6, 0));
        let confusions = GroupedConfusions::new(per_group, None).unwrap();
        let (ratio, pass) = four_fifths_check(&confusions).unwrap();
        assert!((ratio - 0.8).abs() < 1e-12);
        assert!(pass);
    }

    #[test]
    fn four_fifths_identical_rates_pass_at_one() {
        let mut per_group = BTreeMap::new();
        per_group.insert("A".to_string(), ConfusionMatrix::new(3, 1, 5, 1));
        per_group.insert("B".to_string(), ConfusionMatrix::new(2, 2, 4, 2));
        let confusions = GroupedConfusions::new(per_group, None).unwrap();
        let (ratio, pass) = four_fifths_check(&confusions).unwrap();
        assert_eq!(ratio, 1.0);
        assert!(pass);
    }

    #[test]
    fn four_fifths_undefined_when_nobody_is_selected() {
        let mut per_group = BTreeMap::new();
        per_group.insert("A".to_string(), ConfusionMatrix::new(0, 0, 5, 1));
        per_group.insert("B".to_string(), ConfusionMatrix::new(0, 0, 4, 2));
        let confusions = GroupedConfusions::new(per_group, None).unwrap();
        assert!(matches!(
            four_fifths_check(&confusions),
            Err(AuditError::ZeroSelectionEverywhere)
        ));
    }

    #[test]
    fn eo_pp_under_unequal_rates_fires_exactly_one_warning() {
        let requested: BTreeSet<MetricId> = [MetricId::Eo, MetricId::Pp].into_iter().collect();
        let warnings = incompatibility_report(&requested, &diag_with(false, Some(false)));
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].citation.contains("Chouldechova"));
        assert_eq!(warnings[0].condition, IncompatCondition::UnequalBaseRates);
    }

    #[test]
    fn eo_pp_under_equal_rates_still_warns_on_imperfect_prediction() {
        let requested: BTreeSet<MetricId> = [MetricId::Eo, MetricId::Pp].into_iter().collect();
        let warnings = incompatibility_report(&requested, &diag_with(true, Some(false)));
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].citation.contains("Wasserman"));
    }

    #[test]
    fn joint_rule_fires_alongside_pairwise_rules() {
        let requested: BTreeSet<MetricId> =
            [MetricId::Sp, MetricId::Eo, MetricId::Pp].into_iter().collect();
        let warnings = incompatibility_report(&requested, &diag_with(false, Some(false)));
        let citations: Vec<&str> = warnings.iter().map(|w| w.citation.as_str()).collect();
        assert_eq!(warnings.len(), 3);
        assert!(citations.iter().any(|c| c.contains("Chouldechova")));
        assert!(citations.iter().any(|c| c.contains("Hedden")));
        assert!(citations.iter().any(|c| c.contains("Garg")));
    }

    #[test]
    fn single_metric_requests_never_warn() {
        let requested: BTreeSet<MetricId> = [MetricId::Eop].into_iter().collect();
        assert!(incompatibility_report(&requested, &diag_with(false, Some(false))).is_empty());
    }

    #[test]
    fn perfect_prediction_silences_imperfection_rules() {
        let requested: BTreeSet<MetricId> = [MetricId::Sp, MetricId::Eo].into_iter().collect();
        assert!(incompatibility_report(&requested, &diag_with(true, Some(true))).is_empty());
        // unknown prediction quality is assumed imperfect
        assert_eq!(
            incompatibility_report(&requested, &diag_with(true, None)).len(),
            1
        );
    }

    #[test]
    fn diagnose_is_invariant_under_record_reordering() {
        let dataset = grant_dataset();
        let mut reversed: Vec<AuditRecord> = dataset.records().to_vec();
        reversed.reverse();
        let d1 = diagnose(&dataset, 0.05, 0.05).unwrap();
        let d2 = diagnose(&AuditDataset::new(reversed).unwrap(), 0.05, 0.05).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn single_group_is_rejected() {
        let records = vec![
            AuditRecord::with_prediction(true, true, "A"),
            AuditRecord::with_prediction(false, false, "A"),
        ];
        let dataset = AuditDataset::new(records).unwrap();
        assert!(matches!(
            diagnose(&dataset, 0.05, 0.05),
            Err(AuditError::SingleGroup(1))
        ));
    }
}
