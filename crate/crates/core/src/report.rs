//! Audit orchestration and report rendering.
//!
//! A report bundles the dataset summary, diagnostics, metric results,
//! incompatibility warnings, and (optionally) a selector recommendation,
//! together with an echo of every tolerance and convention that shaped a
//! verdict. JSON output is byte-stable: keys are sorted and floats are
//! rounded to six significant digits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::binary_metrics::{binary_metric, confusion_by_group, GroupedConfusions};
use crate::diagnostics::{diagnose, incompatibility_report, DataDiagnostics, IncompatibilityWarning};
use crate::error::Result;
use crate::individual::{knn_consistency, KnncConfig, Normalization, PredictionSource};
use crate::ingest::{apply_threshold, SchemaConfig};
use crate::model::{AuditDataset, ComparisonMode, MetricId, MetricResult, MetricValue};
use crate::score_metrics::{
    auc_by_group, auprc_by_group, balance_by_group, calibration_by_group, BalanceClass,
    CalibrationConfig,
};
use crate::selector::Recommendation;

/// Current report schema version.
pub const REPORT_SCHEMA_VERSION: &str = "1";

/// Which metrics an audit should compute.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSelection {
    /// Every metric the available columns support.
    All,
    /// Exactly these; unsupported ones become per-metric error entries.
    List(Vec<MetricId>),
}

/// Everything that shapes an audit's verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub metrics: MetricSelection,
    pub tolerance: f64,
    pub mode: ComparisonMode,
    pub delta_base_rate: f64,
    pub delta_balance: f64,
    pub calibration: CalibrationConfig,
    pub knnc: KnncConfig,
    /// Applied to scores before computing confusion matrices.
    pub threshold: Option<f64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            metrics: MetricSelection::All,
            tolerance: 0.05,
            mode: ComparisonMode::Parity,
            delta_base_rate: 0.05,
            delta_balance: 0.05,
            calibration: CalibrationConfig::default(),
            knnc: KnncConfig::default(),
            threshold: None,
        }
    }
}

/// Sizes and column availability of the audited dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub total_records: usize,
    pub groups: BTreeMap<String, GroupSummary>,
    pub has_predictions: bool,
    pub has_scores: bool,
    pub feature_dimension: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub records: usize,
    pub positives: usize,
}

/// Echo of every tolerance and fixed convention in effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub metrics_requested: Vec<MetricId>,
    pub tolerance: f64,
    pub comparison_mode: ComparisonMode,
    pub delta_base_rate: f64,
    pub delta_balance: f64,
    pub calibration_bins: usize,
    pub calibration_binning: &'static str,
    pub calibration_empty_bins: &'static str,
    pub knn_k: usize,
    pub knn_distance: &'static str,
    pub knn_normalization: Normalization,
    pub knn_prediction_source: PredictionSource,
    pub knn_tie_break: &'static str,
    pub threshold: Option<f64>,
    pub threshold_tie_rule: &'static str,
    pub auc_tie_handling: &'static str,
    pub auprc_estimator: &'static str,
    pub four_fifths_boundary: &'static str,
    pub f1_precision_definition: &'static str,
    pub multi_group_comparison: &'static str,
    pub fta_satisfaction_rule: &'static str,
}

/// Outcome of one requested metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MetricOutcome {
    /// A group-comparison metric computed successfully.
    Ok {
        #[serde(flatten)]
        result: MetricResultView,
    },
    /// The dataset-global individual-consistency metric.
    Individual {
        consistency: f64,
        k: usize,
        tolerance: f64,
        satisfied: bool,
    },
    /// The metric's preconditions were not met.
    Error { message: String },
}

/// One entry in the report's metric list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricEntry {
    pub metric_id: MetricId,
    #[serde(flatten)]
    pub outcome: MetricOutcome,
}

impl MetricEntry {
    pub fn satisfied(&self) -> Option<bool> {
        match &self.outcome {
            MetricOutcome::Ok { result } => Some(result.satisfied),
            MetricOutcome::Individual { satisfied, .. } => Some(*satisfied),
            MetricOutcome::Error { .. } => None,
        }
    }
}

/// Serializable form of a [`MetricResult`]: per-group values keyed by
/// component name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResultView {
    pub per_group: BTreeMap<String, BTreeMap<&'static str, f64>>,
    pub parity_gap: f64,
    pub disparity_ratio: Option<f64>,
    pub comparison_mode: ComparisonMode,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl MetricResultView {
    pub fn from_result(result: &MetricResult) -> Self {
        let names = result.metric_id.component_names();
        let per_group = result
            .per_group
            .iter()
            .map(|(group, value)| {
                let components: BTreeMap<&'static str, f64> = match *value {
                    MetricValue::Scalar(v) => [(names[0], v)].into_iter().collect(),
                    MetricValue::Pair(a, b) => {
                        [(names[0], a), (names[1], b)].into_iter().collect()
                    }
                };
                (group.clone(), components)
            })
            .collect();
        Self {
            per_group,
            parity_gap: result.parity_gap,
            disparity_ratio: result.disparity_ratio,
            comparison_mode: result.mode,
            tolerance: result.tolerance,
            satisfied: result.satisfied,
        }
    }
}

/// Fixed disclosure texts carried by every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disclaimers {
    pub cultural_context: &'static str,
    pub reconstructed_tree_edges: Vec<String>,
}

const CULTURAL_CONTEXT_DISCLAIMER: &str = "Fairness criteria carry philosophical and cultural \
assumptions and do not transfer unchanged between social contexts. Interpret every verdict in \
this report within the legal framework and cultural setting of the deployment, with input from \
the people affected; a measure appropriate in one context can be misleading in another.";

/// The complete audit output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub schema_version: &'static str,
    pub tool_version: &'static str,
    pub dataset_summary: DatasetSummary,
    pub config_echo: ConfigEcho,
    pub diagnostics: DataDiagnostics,
    pub metric_results: Vec<MetricEntry>,
    pub incompatibility_warnings: Vec<IncompatibilityWarning>,
    pub recommendation: Option<Recommendation>,
    pub disclaimers: Disclaimers,
}

impl AuditReport {
    /// True when every computed metric is satisfied and none errored.
    pub fn all_requested_satisfied(&self) -> bool {
        self.metric_results
            .iter()
            .all(|e| e.satisfied() == Some(true))
    }

    /// Byte-stable JSON: sorted keys, floats at six significant digits.
    pub fn to_stable_json(&self) -> String {
        stable_json(self)
    }

    /// Human-readable markdown rendering.
    pub fn to_markdown(&self) -> String {
        render_markdown(self)
    }
}

/// Serializes any value to deterministic JSON (sorted keys, floats rounded
/// to six significant digits, trailing newline).
pub fn stable_json<T: Serialize>(value: &T) -> String {
    let mut tree = serde_json::to_value(value).expect("report serialization cannot fail");
    round_floats(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree).expect("value serialization cannot fail");
    text.push('\n');
    text
}

fn round_floats(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("checked f64");
                if let Some(rounded) = serde_json::Number::from_f64(round_sig6(x)) {
                    *n = rounded;
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Rounds to six significant digits.
fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Runs the full audit pipeline over a dataset.
pub fn run_audit(dataset: &AuditDataset, config: &AuditConfig) -> Result<AuditReport> {
    let thresholded;
    let data = match config.threshold {
        Some(t) => {
            thresholded = apply_threshold(dataset, t)?;
            &thresholded
        }
        None => dataset,
    };

    let diagnostics = diagnose(data, config.delta_base_rate, config.delta_balance)?;
    let requested = resolve_selection(data, config);

    let confusions = if data.has_predictions() && data.group_keys().len() >= 2 {
        Some(confusion_by_group(data)?)
    } else {
        None
    };

    let metric_results: Vec<MetricEntry> = requested
        .iter()
        .map(|&id| MetricEntry {
            metric_id: id,
            outcome: compute_metric(data, confusions.as_ref(), id, config),
        })
        .collect();

    let requested_set: BTreeSet<MetricId> = requested.iter().copied().collect();
    let incompatibility_warnings = incompatibility_report(&requested_set, &diagnostics);

    Ok(AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        dataset_summary: summarize(data),
        config_echo: echo_config(config, &requested),
        diagnostics,
        metric_results,
        incompatibility_warnings,
        recommendation: None,
        disclaimers: Disclaimers {
            cultural_context: CULTURAL_CONTEXT_DISCLAIMER,
            reconstructed_tree_edges: crate::selector::decision_tree().reconstructed_edges(),
        },
    })
}

fn resolve_selection(dataset: &AuditDataset, config: &AuditConfig) -> Vec<MetricId> {
    match &config.metrics {
        MetricSelection::List(list) => list.clone(),
        MetricSelection::All => MetricId::ALL
            .into_iter()
            .filter(|id| {
                if id.is_binary() {
                    dataset.has_predictions()
                } else if id.is_score_based() {
                    dataset.has_scores()
                } else {
                    // FTA additionally needs a valid neighbour count
                    dataset.has_features() && config.knnc.k < dataset.len()
                }
            })
            .collect(),
    }
}

fn compute_metric(
    dataset: &AuditDataset,
    confusions: Option<&GroupedConfusions>,
    id: MetricId,
    config: &AuditConfig,
) -> MetricOutcome {
    let tolerance = config.tolerance;
    let mode = config.mode;
    let result = if id.is_binary() {
        match confusions {
            Some(c) => binary_metric(id, c, tolerance, mode),
            None => confusion_by_group(dataset).and_then(|c| binary_metric(id, &c, tolerance, mode)),
        }
    } else {
        match id {
            MetricId::BgAuc => auc_by_group(dataset, tolerance, mode),
            MetricId::BgAuprc => auprc_by_group(dataset, tolerance, mode),
            MetricId::Cal => calibration_by_group(dataset, &config.calibration, tolerance, mode),
            MetricId::BalPos => balance_by_group(dataset, BalanceClass::Positive, tolerance, mode),
            MetricId::BalNeg => balance_by_group(dataset, BalanceClass::Negative, tolerance, mode),
            MetricId::Bal => balance_by_group(dataset, BalanceClass::Overall, tolerance, mode),
            MetricId::Fta => {
                return match knn_consistency(dataset, &config.knnc) {
                    Ok(consistency) => MetricOutcome::Individual {
                        consistency,
                        k: config.knnc.k,
                        tolerance,
                        satisfied: consistency >= 1.0 - tolerance,
                    },
                    Err(e) => MetricOutcome::Error {
                        message: e.to_string(),
                    },
                }
            }
            _ => unreachable!("binary ids handled above"),
        }
    };
    match result {
        Ok(r) => MetricOutcome::Ok {
            result: MetricResultView::from_result(&r),
        },
        Err(e) => MetricOutcome::Error {
            message: e.to_string(),
        },
    }
}

fn summarize(dataset: &AuditDataset) -> DatasetSummary {
    let mut groups: BTreeMap<String, GroupSummary> = BTreeMap::new();
    for record in dataset.records() {
        let entry = groups.entry(record.group().to_string()).or_insert(GroupSummary {
            records: 0,
            positives: 0,
        });
        entry.records += 1;
        if record.true_outcome() {
            entry.positives += 1;
        }
    }
    DatasetSummary {
        total_records: dataset.len(),
        groups,
        has_predictions: dataset.has_predictions(),
        has_scores: dataset.has_scores(),
        feature_dimension: dataset.feature_dimension(),
    }
}

fn echo_config(config: &AuditConfig, requested: &[MetricId]) -> ConfigEcho {
    ConfigEcho {
        metrics_requested: requested.to_vec(),
        tolerance: config.tolerance,
        comparison_mode: config.mode,
        delta_base_rate: config.delta_base_rate,
        delta_balance: config.delta_balance,
        calibration_bins: config.calibration.bin_count,
        calibration_binning: "equal_width_on_unit_interval",
        calibration_empty_bins: "excluded_from_mean",
        knn_k: config.knnc.k,
        knn_distance: "euclidean",
        knn_normalization: config.knnc.normalization,
        knn_prediction_source: config.knnc.prediction_source,
        knn_tie_break: "lowest_record_index",
        threshold: config.threshold,
        threshold_tie_rule: "score_at_threshold_is_positive",
        auc_tie_handling: "ties_count_one_half",
        auprc_estimator: "average_precision_step_sum",
        four_fifths_boundary: "inclusive_at_0.8",
        f1_precision_definition: "positive_predictive_value",
        multi_group_comparison: "max_gap_and_min_ratio_over_all_pairs",
        fta_satisfaction_rule: "consistency_at_least_one_minus_tolerance",
    }
}

/// Writes a dataset back to CSV under the same schema that loaded it, so a
/// reload yields record-wise equal data.
pub fn dataset_to_csv(dataset: &AuditDataset, schema: &SchemaConfig) -> String {
    let negative_label = schema.negative_label.clone().unwrap_or_else(|| "0".into());
    let binary = |v: bool| {
        if v {
            schema.positive_label.clone()
        } else {
            negative_label.clone()
        }
    };
    let mut header = vec![schema.label_column.clone(), schema.group_column.clone()];
    if let Some(c) = &schema.prediction_column {
        header.push(c.clone());
    }
    if let Some(c) = &schema.score_column {
        header.push(c.clone());
    }
    header.extend(schema.feature_columns.iter().cloned());

    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(&header).expect("in-memory write");
    for record in dataset.records() {
        let mut row = vec![binary(record.true_outcome()), record.group().to_string()];
        if schema.prediction_column.is_some() {
            row.push(
                record
                    .predicted_outcome()
                    .map(&binary)
                    .unwrap_or_default(),
            );
        }
        if schema.score_column.is_some() {
            row.push(record.score().map(|s| s.to_string()).unwrap_or_default());
        }
        if !schema.feature_columns.is_empty() {
            match record.features() {
                Some(features) => row.extend(features.iter().map(|f| f.to_string())),
                None => row.extend(schema.feature_columns.iter().map(|_| String::new())),
            }
        }
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8 csv")
}

fn fmt6(x: f64) -> String {
    format!("{}", round_sig6(x))
}

fn render_markdown(report: &AuditReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Fairness audit report\n");
    let _ = writeln!(
        out,
        "schema {} · tool {}\n",
        report.schema_version, report.tool_version
    );

    let _ = writeln!(out, "## Dataset\n");
    let s = &report.dataset_summary;
    let _ = writeln!(out, "| group | records | positives | base rate |");
    let _ = writeln!(out, "|---|---|---|---|");
    for (group, g) in &s.groups {
        let _ = writeln!(
            out,
            "| {group} | {} | {} | {} |",
            g.records,
            g.positives,
            fmt6(g.positives as f64 / g.records as f64)
        );
    }
    let _ = writeln!(
        out,
        "\n{} records | predictions: {} | scores: {} | features: {}\n",
        s.total_records,
        s.has_predictions,
        s.has_scores,
        s.feature_dimension
            .map(|d| format!("{d}-dimensional"))
            .unwrap_or_else(|| "none".into())
    );

    let _ = writeln!(out, "## Diagnostics\n");
    let d = &report.diagnostics;
    let _ = writeln!(
        out,
        "- base rates equal: **{}** (max gap tolerance {})",
        d.base_rates_equal, d.delta_base_rate
    );
    let _ = writeln!(
        out,
        "- dataset balanced: **{}** (positive fraction {}, tolerance {})",
        d.dataset_balanced,
        fmt6(d.positive_fraction),
        d.delta_balance
    );
    match (d.four_fifths_ratio, d.four_fifths_pass) {
        (Some(ratio), Some(pass)) => {
            let _ = writeln!(
                out,
                "- four-fifths selection-rate ratio: {} → **{}**",
                fmt6(ratio),
                if pass { "pass" } else { "fail" }
            );
        }
        _ => {
            let _ = writeln!(out, "- four-fifths ratio: not computed");
        }
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## Metrics\n");
    let _ = writeln!(out, "| metric | verdict | parity gap | disparity ratio | per group |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for entry in &report.metric_results {
        match &entry.outcome {
            MetricOutcome::Ok { result } => {
                let per_group = result
                    .per_group
                    .iter()
                    .map(|(g, comps)| {
                        let values = comps
                            .iter()
                            .map(|(name, v)| format!("{name}={}", fmt6(*v)))
                            .collect::<Vec<_>>()
                            .join(", ");
                        format!("{g}: {values}")
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    entry.metric_id,
                    if result.satisfied {
                        "satisfied"
                    } else {
                        "NOT satisfied"
                    },
                    fmt6(result.parity_gap),
                    result
                        .disparity_ratio
                        .map(fmt6)
                        .unwrap_or_else(|| "undefined".into()),
                    per_group
                );
            }
            MetricOutcome::Individual {
                consistency,
                k,
                satisfied,
                ..
            } => {
                let _ = writeln!(
                    out,
                    "| {} | {} | — | — | consistency={} (k={k}) |",
                    entry.metric_id,
                    if *satisfied { "satisfied" } else { "NOT satisfied" },
                    fmt6(*consistency)
                );
            }
            MetricOutcome::Error { message } => {
                let _ = writeln!(out, "| {} | error | — | — | {message} |", entry.metric_id);
            }
        }
    }
    let _ = writeln!(out);

    if !report.incompatibility_warnings.is_empty() {
        let _ = writeln!(out, "## Incompatibility warnings\n");
        for w in &report.incompatibility_warnings {
            let metrics = w
                .metrics
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(" + ");
            let _ = writeln!(out, "- **{metrics}** — {} ({})", w.message, w.citation);
        }
        let _ = writeln!(out);
    }

    if let Some(rec) = &report.recommendation {
        let _ = writeln!(out, "## Recommendation\n");
        render_recommendation_md(&mut out, rec);
    }

    let _ = writeln!(out, "## Disclosures\n");
    let _ = writeln!(out, "{}\n", report.disclaimers.cultural_context);
    if !report.disclaimers.reconstructed_tree_edges.is_empty() {
        let _ = writeln!(
            out,
            "Selection-tree edges not validated against a published walkthrough:"
        );
        for edge in &report.disclaimers.reconstructed_tree_edges {
            let _ = writeln!(out, "- {edge}");
        }
    }
    out
}

/// Markdown rendering of a recommendation, shared with the CLI.
pub fn render_recommendation_md(out: &mut String, rec: &Recommendation) {
    let _ = match (&rec.referral, rec.metrics.is_empty()) {
        (Some(referral), _) => writeln!(out, "Referral: **{referral:?}** — no metric recommended."),
        (None, false) => writeln!(
            out,
            "Recommended metrics (primary first): **{}**",
            rec.metrics
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        (None, true) => writeln!(out, "No recommendation produced."),
    };
    let _ = writeln!(out, "\nDecision trace:\n");
    for step in &rec.trace {
        let _ = writeln!(
            out,
            "{}. (node {}) {} → `{}`",
            step.node_id, step.node_id, step.question, step.answer
        );
    }
    if !rec.warnings.is_empty() {
        let _ = writeln!(out, "\nAdvisories:");
        for w in &rec.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    let _ = writeln!(out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_dataset, DataFormat};
    use crate::model::AuditRecord;
    use std::io::Write as _;

    fn symmetric_dataset() -> AuditDataset {
        let mut records = Vec::new();
        for g in ["A", "B"] {
            for _ in 0..4 {
                records.push(AuditRecord::with_prediction(true, true, g));
                records.push(AuditRecord::with_prediction(false, false, g));
                records.push(AuditRecord::with_prediction(true, false, g));
                records.push(AuditRecord::with_prediction(false, true, g));
            }
        }
        AuditDataset::new(records).unwrap()
    }

    #[test]
    fn audit_report_json_is_byte_stable() {
        let dataset = symmetric_dataset();
        let config = AuditConfig::default();
        let a = run_audit(&dataset, &config).unwrap().to_stable_json();
        let b = run_audit(&dataset, &config).unwrap().to_stable_json();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn symmetric_data_satisfies_every_supported_metric() {
        let report = run_audit(&symmetric_dataset(), &AuditConfig::default()).unwrap();
        assert!(report.all_requested_satisfied());
        // binary metrics only: no scores, no features
        assert!(report
            .config_echo
            .metrics_requested
            .iter()
            .all(|m| m.is_binary()));
    }

    #[test]
    fn explicit_unsupported_metric_becomes_error_entry() {
        let config = AuditConfig {
            metrics: MetricSelection::List(vec![MetricId::Sp, MetricId::BgAuc]),
            ..Default::default()
        };
        let report = run_audit(&symmetric_dataset(), &config).unwrap();
        assert_eq!(report.metric_results.len(), 2);
        assert_eq!(report.metric_results[0].satisfied(), Some(true));
        assert!(matches!(
            report.metric_results[1].outcome,
            MetricOutcome::Error { .. }
        ));
        assert!(!report.all_requested_satisfied());
    }

    #[test]
    fn config_echo_carries_every_tolerance() {
        let report = run_audit(&symmetric_dataset(), &AuditConfig::default()).unwrap();
        let json = report.to_stable_json();
        for key in [
            "tolerance",
            "delta_base_rate",
            "delta_balance",
            "calibration_bins",
            "knn_k",
            "threshold_tie_rule",
            "four_fifths_boundary",
        ] {
            assert!(json.contains(key), "config echo is missing {key}");
        }
    }

    #[test]
    fn reports_always_carry_the_disclaimers() {
        let report = run_audit(&symmetric_dataset(), &AuditConfig::default()).unwrap();
        assert!(!report.disclaimers.cultural_context.is_empty());
        assert!(!report.disclaimers.reconstructed_tree_edges.is_empty());
        let md = report.to_markdown();
        assert!(md.contains("## Disclosures"));
    }

    #[test]
    fn six_significant_digit_rounding() {
        assert_eq!(round_sig6(10.0 / 19.0), 0.526316);
        assert_eq!(round_sig6(0.000123456789), 0.000123457);
        assert_eq!(round_sig6(0.0), 0.0);
        assert_eq!(round_sig6(1.0), 1.0);
    }

    #[test]
    fn csv_round_trip_is_record_wise_equal() {
        let mut schema = SchemaConfig::with_prediction("y", "yhat", "g");
        schema.score_column = Some("s".into());
        schema.feature_columns = vec!["x1".into(), "x2".into()];
        let file_content = "y,yhat,g,s,x1,x2\n1,1,A,0.75,1.5,2.25\n0,1,B,0.5,0.125,3.0\n1,0,B,,0.25,0.5\n";
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(file_content.as_bytes()).unwrap();
        let dataset = load_dataset(file.path(), DataFormat::Csv, &schema).unwrap();

        let written = dataset_to_csv(&dataset, &schema);
        let mut round = tempfile::NamedTempFile::new().unwrap();
        round.write_all(written.as_bytes()).unwrap();
        let reloaded = load_dataset(round.path(), DataFormat::Csv, &schema).unwrap();
        assert_eq!(dataset, reloaded);
    }

    #[test]
    fn markdown_lists_metrics_and_verdicts() {
        let config = AuditConfig {
            metrics: MetricSelection::List(vec![MetricId::Sp, MetricId::Eo]),
            ..Default::default()
        };
        let report = run_audit(&symmetric_dataset(), &config).unwrap();
        let md = report.to_markdown();
        assert!(md.contains("| SP |"));
        assert!(md.contains("| EO |"));
        assert!(md.contains("## Diagnostics"));
    }
}
