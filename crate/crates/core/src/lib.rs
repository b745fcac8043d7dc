//! Fairness auditing for binary classifiers: group and individual fairness
//! metrics over grouped prediction data, data diagnostics (base rates,
//! balance, the four-fifths rule), warnings for mathematically incompatible
//! metric combinations, and a context-driven metric selector.

pub mod binary_metrics;
pub mod diagnostics;
pub mod error;
pub mod individual;
pub mod ingest;
pub mod model;
pub mod report;
pub mod score_metrics;
pub mod selector;

pub use error::{AuditError, Result};
pub use model::{
    group_partition, AuditDataset, AuditRecord, ComparisonMode, ConfusionMatrix, MetricId,
    MetricResult, MetricValue,
};
