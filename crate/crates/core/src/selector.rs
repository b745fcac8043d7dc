//! Context-based metric selection: a deterministic decision tree over twelve
//! audit-context criteria, producing recommended metrics with a node-by-node
//! trace, advisories, and out-of-scope referrals.
//!
//! The tree itself ships as a versioned JSON asset (embedded at compile
//! time) so its edges and leaves can be audited and tested without touching
//! code. Edges not validated against a published walkthrough are marked
//! `reconstructed`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DataDiagnostics;
use crate::error::{AuditError, Result};
use crate::model::MetricId;

const TREE_JSON: &str = include_str!("../assets/decision_tree.json");

/// What is being assessed (node 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssessmentTarget {
    DataGeneration,
    PredictedOutcome,
    InducedImpact,
}

/// Kind of model under audit (node 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    Classification,
    ContinuousPrediction,
    Generative,
}

/// Plain yes/no criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YesNo {
    Yes,
    No,
}

/// Yes/no criterion that can be measured from a supplied dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoBool {
    Yes,
    No,
    /// Resolve from data diagnostics before traversal.
    Auto,
}

/// Binary or regressive model outputs (node 6).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Binary,
    Regressive,
}

/// Fixed or floating classification threshold (node 10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Fixed,
    Floating,
}

/// Precision/recall emphasis (nodes 7 and 12).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionRecall {
    Precision,
    Recall,
    Equal,
}

/// False-positive/false-negative emphasis (nodes 13 and 15).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpFnEmphasis {
    Fp,
    Fn,
    Equal,
}

/// Positive/negative class emphasis (node 9).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassEmphasis {
    Positive,
    Negative,
    Equal,
}

/// The twelve context criteria driving the selection tree. All fields are
/// explicit; the two data-measurable ones additionally accept `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextAnswers {
    pub assessment_target: AssessmentTarget,
    pub model_type: ModelType,
    pub suspected_data_bias: YesNo,
    pub distance_metric_available: YesNo,
    pub equity_required: YesNo,
    pub output_kind: OutputKind,
    pub threshold_kind: ThresholdKind,
    pub base_rates_equal: AutoBool,
    pub emphasis_precision_recall: PrecisionRecall,
    pub emphasis_fp_fn: FpFnEmphasis,
    pub class_emphasis: ClassEmphasis,
    pub dataset_balanced: AutoBool,
}

impl ContextAnswers {
    /// The enumerant string for a tree criterion; errors on unresolved `auto`.
    fn answer_str(&self, criterion: &str) -> Result<&'static str> {
        let auto_bool = |value: AutoBool, field: &'static str| match value {
            AutoBool::Yes => Ok("yes"),
            AutoBool::No => Ok("no"),
            AutoBool::Auto => Err(AuditError::AutoWithoutData(field)),
        };
        let yes_no = |value: YesNo| match value {
            YesNo::Yes => "yes",
            YesNo::No => "no",
        };
        Ok(match criterion {
            "assessment_target" => match self.assessment_target {
                AssessmentTarget::DataGeneration => "data_generation",
                AssessmentTarget::PredictedOutcome => "predicted_outcome",
                AssessmentTarget::InducedImpact => "induced_impact",
            },
            "model_type" => match self.model_type {
                ModelType::Classification => "classification",
                ModelType::ContinuousPrediction => "continuous_prediction",
                ModelType::Generative => "generative",
            },
            "suspected_data_bias" => yes_no(self.suspected_data_bias),
            "distance_metric_available" => yes_no(self.distance_metric_available),
            "equity_required" => yes_no(self.equity_required),
            "output_kind" => match self.output_kind {
                OutputKind::Binary => "binary",
                OutputKind::Regressive => "regressive",
            },
            "threshold_kind" => match self.threshold_kind {
                ThresholdKind::Fixed => "fixed",
                ThresholdKind::Floating => "floating",
            },
            "base_rates_equal" => auto_bool(self.base_rates_equal, "base_rates_equal")?,
            "emphasis_precision_recall" => match self.emphasis_precision_recall {
                PrecisionRecall::Precision => "precision",
                PrecisionRecall::Recall => "recall",
                PrecisionRecall::Equal => "equal",
            },
            "emphasis_fp_fn" => match self.emphasis_fp_fn {
                FpFnEmphasis::Fp => "fp",
                FpFnEmphasis::Fn => "fn",
                FpFnEmphasis::Equal => "equal",
            },
            "class_emphasis" => match self.class_emphasis {
                ClassEmphasis::Positive => "positive",
                ClassEmphasis::Negative => "negative",
                ClassEmphasis::Equal => "equal",
            },
            "dataset_balanced" => auto_bool(self.dataset_balanced, "dataset_balanced")?,
            other => {
                return Err(AuditError::DecisionTree(format!(
                    "unknown criterion '{other}'"
                )))
            }
        })
    }
}

/// A selector outcome that points outside this tool's scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Referral {
    CausalFairness,
    GenerativeFairness,
    InducedImpact,
}

/// One traversal step: which node was visited and how it was answered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub node_id: u32,
    pub question: String,
    pub answer: String,
}

/// The selector's verdict: recommended metrics (primary first) or a
/// referral, with the full decision trace and any advisories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub metrics: Vec<MetricId>,
    pub trace: Vec<TraceStep>,
    pub warnings: Vec<String>,
    pub referral: Option<Referral>,
}

/// Where a tree edge leads.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeTarget {
    Next(u32),
    Metrics(Vec<MetricId>),
    Referral(Referral),
}

/// One outgoing edge of a tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEdge {
    pub answer: String,
    pub target: EdgeTarget,
    pub note: Option<String>,
    pub reconstructed: bool,
}

/// One question node.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: u32,
    pub criterion: String,
    pub question: String,
    pub edges: Vec<TreeEdge>,
}

/// The whole selection tree, as parsed from the JSON asset.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub tree_version: String,
    pub entry: u32,
    nodes: BTreeMap<u32, TreeNode>,
}

#[derive(Deserialize)]
struct RawTree {
    tree_version: String,
    entry: u32,
    nodes: Vec<RawNode>,
}

#[derive(Deserialize)]
struct RawNode {
    id: u32,
    criterion: String,
    question: String,
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
struct RawEdge {
    answer: String,
    #[serde(default)]
    next: Option<u32>,
    #[serde(default)]
    metrics: Option<Vec<MetricId>>,
    #[serde(default)]
    referral: Option<Referral>,
    #[serde(default)]
    note: Option<String>,
    #[serde(default)]
    reconstructed: bool,
}

impl DecisionTree {
    /// Parses and structurally validates a tree from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTree = serde_json::from_str(text)?;
        let mut nodes = BTreeMap::new();
        for node in raw.nodes {
            let edges = node
                .edges
                .into_iter()
                .map(|e| {
                    let target = match (e.next, e.metrics, e.referral) {
                        (Some(id), None, None) => EdgeTarget::Next(id),
                        (None, Some(m), None) if !m.is_empty() => EdgeTarget::Metrics(m),
                        (None, None, Some(r)) => EdgeTarget::Referral(r),
                        _ => {
                            return Err(AuditError::DecisionTree(format!(
                                "node {} edge '{}' must have exactly one of next/metrics/referral",
                                node.id, e.answer
                            )))
                        }
                    };
                    Ok(TreeEdge {
                        answer: e.answer,
                        target,
                        note: e.note,
                        reconstructed: e.reconstructed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            nodes.insert(
                node.id,
                TreeNode {
                    id: node.id,
                    criterion: node.criterion,
                    question: node.question,
                    edges,
                },
            );
        }
        let tree = Self {
            tree_version: raw.tree_version,
            entry: raw.entry,
            nodes,
        };
        // every internal edge must point at an existing node
        for node in tree.nodes.values() {
            for edge in &node.edges {
                if let EdgeTarget::Next(id) = edge.target {
                    if !tree.nodes.contains_key(&id) {
                        return Err(AuditError::DecisionTree(format!(
                            "node {} points at missing node {id}",
                            node.id
                        )));
                    }
                }
            }
        }
        if !tree.nodes.contains_key(&tree.entry) {
            return Err(AuditError::DecisionTree(format!(
                "entry node {} does not exist",
                tree.entry
            )));
        }
        Ok(tree)
    }

    pub fn node(&self, id: u32) -> Result<&TreeNode> {
        self.nodes
            .get(&id)
            .ok_or_else(|| AuditError::DecisionTree(format!("missing node {id}")))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.values()
    }

    /// Human-readable descriptors of every edge marked `reconstructed`,
    /// for disclosure in reports.
    pub fn reconstructed_edges(&self) -> Vec<String> {
        self.nodes
            .values()
            .flat_map(|node| {
                node.edges
                    .iter()
                    .filter(|e| e.reconstructed)
                    .map(move |e| format!("node {} ({}): answer '{}'", node.id, node.criterion, e.answer))
            })
            .collect()
    }
}

/// The built-in selection tree.
pub fn decision_tree() -> &'static DecisionTree {
    static TREE: OnceLock<DecisionTree> = OnceLock::new();
    TREE.get_or_init(|| DecisionTree::from_json(TREE_JSON).expect("embedded tree is valid"))
}

/// Resolved answers plus any contradiction warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedContext {
    pub answers: ContextAnswers,
    pub warnings: Vec<String>,
}

/// Substitutes `auto` answers with the diagnostics verdicts and flags
/// explicit answers that contradict the measured data.
pub fn resolve_context(
    answers: &ContextAnswers,
    diag: Option<&DataDiagnostics>,
) -> Result<ResolvedContext> {
    let mut resolved = *answers;
    let mut warnings = Vec::new();
    let field = |value: AutoBool,
                     measured: Option<bool>,
                     name: &'static str,
                     warnings: &mut Vec<String>|
     -> Result<AutoBool> {
        match (value, measured) {
            (AutoBool::Auto, Some(m)) => Ok(if m { AutoBool::Yes } else { AutoBool::No }),
            (AutoBool::Auto, None) => Err(AuditError::AutoWithoutData(name)),
            (explicit, Some(m)) => {
                let said = explicit == AutoBool::Yes;
                if said != m {
                    warnings.push(format!(
                        "context says {name} = {}, but the data measures {}; keeping the explicit answer",
                        if said { "yes" } else { "no" },
                        if m { "yes" } else { "no" }
                    ));
                }
                Ok(explicit)
            }
            (explicit, None) => Ok(explicit),
        }
    };
    resolved.base_rates_equal = field(
        answers.base_rates_equal,
        diag.map(|d| d.base_rates_equal),
        "base_rates_equal",
        &mut warnings,
    )?;
    resolved.dataset_balanced = field(
        answers.dataset_balanced,
        diag.map(|d| d.dataset_balanced),
        "dataset_balanced",
        &mut warnings,
    )?;
    Ok(ResolvedContext {
        answers: resolved,
        warnings,
    })
}

/// Traverses the selection tree for fully resolved answers. Every traversal
/// terminates in at most nine steps, ending in recommended metrics or a
/// referral (never both, never neither).
pub fn recommend(answers: &ContextAnswers) -> Result<Recommendation> {
    recommend_with(decision_tree(), answers)
}

/// As [`recommend`], against a caller-supplied tree.
pub fn recommend_with(tree: &DecisionTree, answers: &ContextAnswers) -> Result<Recommendation> {
    let mut node = tree.node(tree.entry)?;
    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    loop {
        if trace.len() > tree.nodes.len() {
            return Err(AuditError::DecisionTree("tree contains a cycle".into()));
        }
        let answer = answers.answer_str(&node.criterion)?;
        let edge = node
            .edges
            .iter()
            .find(|e| e.answer == answer)
            .ok_or_else(|| {
                AuditError::DecisionTree(format!(
                    "node {} has no edge for answer '{answer}'",
                    node.id
                ))
            })?;
        trace.push(TraceStep {
            node_id: node.id,
            question: node.question.clone(),
            answer: answer.to_string(),
        });
        if let Some(note) = &edge.note {
            warnings.push(note.clone());
        }
        match &edge.target {
            EdgeTarget::Next(id) => node = tree.node(*id)?,
            EdgeTarget::Metrics(metrics) => {
                return Ok(Recommendation {
                    metrics: metrics.clone(),
                    trace,
                    warnings,
                    referral: None,
                })
            }
            EdgeTarget::Referral(referral) => {
                return Ok(Recommendation {
                    metrics: Vec::new(),
                    trace,
                    warnings,
                    referral: Some(*referral),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Context for the recidivism walkthrough: unequal base rates divert the
    /// binary path to regressive measures.
    pub(crate) fn recidivism_context() -> ContextAnswers {
        ContextAnswers {
            assessment_target: AssessmentTarget::PredictedOutcome,
            model_type: ModelType::Classification,
            suspected_data_bias: YesNo::Yes,
            distance_metric_available: YesNo::No,
            equity_required: YesNo::No,
            output_kind: OutputKind::Binary,
            threshold_kind: ThresholdKind::Fixed,
            base_rates_equal: AutoBool::No,
            emphasis_precision_recall: PrecisionRecall::Recall,
            emphasis_fp_fn: FpFnEmphasis::Equal,
            class_emphasis: ClassEmphasis::Equal,
            dataset_balanced: AutoBool::Yes,
        }
    }

    #[test]
    fn recidivism_walkthrough_recommends_auc_parity() {
        let r = recommend(&recidivism_context()).unwrap();
        assert_eq!(r.metrics, vec![MetricId::BgAuc]);
        let nodes: Vec<u32> = r.trace.iter().map(|s| s.node_id).collect();
        assert_eq!(nodes, vec![1, 2, 3, 5, 6, 10, 11, 7, 8]);
        assert!(r.referral.is_none());
        assert!(!r.warnings.is_empty()); // the unequal-base-rates advisory
    }

    #[test]
    fn cv_screening_walkthrough_recommends_statistical_parity() {
        let mut ctx = recidivism_context();
        ctx.equity_required = YesNo::Yes;
        let r = recommend(&ctx).unwrap();
        assert_eq!(r.metrics, vec![MetricId::Sp]);
        let nodes: Vec<u32> = r.trace.iter().map(|s| s.node_id).collect();
        assert_eq!(nodes, vec![1, 2, 3, 5]);
    }

    #[test]
    fn spam_filter_walkthrough_recommends_accuracy_parity() {
        let mut ctx = recidivism_context();
        ctx.base_rates_equal = AutoBool::Yes;
        ctx.emphasis_precision_recall = PrecisionRecall::Equal;
        let r = recommend(&ctx).unwrap();
        assert_eq!(r.metrics, vec![MetricId::BgAcc]);
        let nodes: Vec<u32> = r.trace.iter().map(|s| s.node_id).collect();
        assert_eq!(nodes, vec![1, 2, 3, 5, 6, 10, 11, 12, 14]);
    }

    #[test]
    fn data_generation_assessment_is_referred_out() {
        let mut ctx = recidivism_context();
        ctx.assessment_target = AssessmentTarget::DataGeneration;
        let r = recommend(&ctx).unwrap();
        assert!(r.metrics.is_empty());
        assert_eq!(r.referral, Some(Referral::CausalFairness));
    }

    #[test]
    fn continuous_prediction_with_distance_metric_selects_fta() {
        let mut ctx = recidivism_context();
        ctx.model_type = ModelType::ContinuousPrediction;
        ctx.distance_metric_available = YesNo::Yes;
        let r = recommend(&ctx).unwrap();
        assert_eq!(r.metrics, vec![MetricId::Fta]);
        assert_eq!(
            r.trace.iter().map(|s| s.node_id).collect::<Vec<_>>(),
            vec![1, 2, 4]
        );
    }

    #[test]
    fn auto_answers_are_rejected_without_data() {
        let mut ctx = recidivism_context();
        ctx.base_rates_equal = AutoBool::Auto;
        assert!(matches!(
            recommend(&ctx),
            Err(AuditError::AutoWithoutData("base_rates_equal"))
        ));
        assert!(matches!(
            resolve_context(&ctx, None),
            Err(AuditError::AutoWithoutData("base_rates_equal"))
        ));
    }

    #[test]
    fn resolve_substitutes_auto_from_diagnostics() {
        let diag = crate::diagnostics::DataDiagnostics {
            base_rate_per_group: Default::default(),
            base_rates_equal: false,
            delta_base_rate: 0.05,
            positive_fraction: 0.5,
            dataset_balanced: true,
            delta_balance: 0.05,
            four_fifths_ratio: None,
            four_fifths_pass: None,
            perfect_prediction: None,
        };
        let mut ctx = recidivism_context();
        ctx.base_rates_equal = AutoBool::Auto;
        ctx.dataset_balanced = AutoBool::Auto;
        let resolved = resolve_context(&ctx, Some(&diag)).unwrap();
        assert_eq!(resolved.answers.base_rates_equal, AutoBool::No);
        assert_eq!(resolved.answers.dataset_balanced, AutoBool::Yes);
        assert!(resolved.warnings.is_empty());
    }

    #[test]
    fn resolve_passes_explicit_answers_through_unchanged() {
        let ctx = recidivism_context();
        let resolved = resolve_context(&ctx, None).unwrap();
        assert_eq!(resolved.answers, ctx);
        assert!(resolved.warnings.is_empty());
    }

    #[test]
    fn resolve_flags_contradictions_but_keeps_the_answer() {
        let diag = crate::diagnostics::DataDiagnostics {
            base_rate_per_group: Default::default(),
            base_rates_equal: false,
            delta_base_rate: 0.05,
            positive_fraction: 0.5,
            dataset_balanced: true,
            delta_balance: 0.05,
            four_fifths_ratio: None,
            four_fifths_pass: None,
            perfect_prediction: None,
        };
        let mut ctx = recidivism_context();
        ctx.base_rates_equal = AutoBool::Yes; // contradicts measured `false`
        let resolved = resolve_context(&ctx, Some(&diag)).unwrap();
        assert_eq!(resolved.answers.base_rates_equal, AutoBool::Yes);
        assert_eq!(resolved.warnings.len(), 1);
        assert!(resolved.warnings[0].contains("base_rates_equal"));
    }

    #[test]
    fn tree_asset_is_structurally_sound() {
        let tree = decision_tree();
        assert_eq!(tree.entry, 1);
        assert_eq!(tree.nodes().count(), 15);
        // every criterion name resolves against a real context
        let ctx = recidivism_context();
        for node in tree.nodes() {
            ctx.answer_str(&node.criterion).unwrap();
            assert!(!node.edges.is_empty());
        }
        assert!(!tree.reconstructed_edges().is_empty());
    }

    #[test]
    fn context_json_round_trip_uses_snake_case_enumerants() {
        let text = r#"{
            "assessment_target": "predicted_outcome",
            "model_type": "classification",
            "suspected_data_bias": "yes",
            "distance_metric_available": "no",
            "equity_required": "no",
            "output_kind": "binary",
            "threshold_kind": "fixed",
            "base_rates_equal": "no",
            "emphasis_precision_recall": "recall",
            "emphasis_fp_fn": "equal",
            "class_emphasis": "equal",
            "dataset_balanced": "yes"
        }"#;
        let parsed: ContextAnswers = serde_json::from_str(text).unwrap();
        assert_eq!(parsed, recidivism_context());
        let unknown_field = r#"{"assessment_target": "predicted_outcome", "nope": 1}"#;
        assert!(serde_json::from_str::<ContextAnswers>(unknown_field).is_err());
    }
}
