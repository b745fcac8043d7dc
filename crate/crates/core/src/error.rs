//! Error type shared by all audit operations.

use thiserror::Error;

/// Errors produced while loading data, computing metrics, or running the
/// metric selector.
#[derive(Debug, Error)]
pub enum AuditError {
    /// The dataset contains no records.
    #[error("dataset contains no records")]
    EmptyDataset,

    /// A group-level computation was requested on fewer than two groups.
    #[error("at least two groups are required, found {0}")]
    SingleGroup(usize),

    /// A group exists in the key set but holds no records.
    #[error("group '{0}' contains no records")]
    EmptyGroup(String),

    /// A record violates a construction invariant.
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    /// A declared column is missing from the input header.
    #[error("missing column '{0}'")]
    MissingColumn(String),

    /// A label (or prediction) value could not be interpreted as binary.
    #[error("row {row}: bad label value '{value}'")]
    BadLabel { row: usize, value: String },

    /// A score value lies outside [0, 1].
    #[error("row {row}: score {value} is outside [0, 1]")]
    BadScore { row: usize, value: f64 },

    /// A row could not be parsed under the declared schema.
    #[error("row {row}: {message}")]
    ParseError { row: usize, message: String },

    /// The schema itself is inconsistent.
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    /// An operation needing scores found a record without one.
    #[error("record {0} has no score")]
    MissingScore(usize),

    /// An operation needing binary predictions found a record without one.
    #[error("record {0} has no predicted outcome")]
    MissingPrediction(usize),

    /// A rate's denominator is zero for some group.
    #[error("rate {rate} is undefined for group '{group}' (zero denominator)")]
    UndefinedRate { group: String, rate: &'static str },

    /// A group lacks the positive or negative outcomes a score metric needs.
    #[error("group '{group}' has no {class} outcomes")]
    DegenerateGroup { group: String, class: &'static str },

    /// Calibration found no populated bins for a group.
    #[error("no calibration bins populated for group '{0}'")]
    NoBinsPopulated(String),

    /// Records lack feature vectors.
    #[error("record {0} has no feature vector")]
    MissingFeatures(usize),

    /// The neighbour count is not smaller than the dataset.
    #[error("k = {k} must be smaller than the dataset size {n}")]
    KTooLarge { k: usize, n: usize },

    /// Every group's selection rate is zero; the adverse-impact ratio is undefined.
    #[error("all selection rates are zero; impact ratio undefined")]
    ZeroSelectionEverywhere,

    /// Context answers contain `auto` fields but no dataset was supplied.
    #[error("context field '{0}' is 'auto' but no dataset diagnostics are available")]
    AutoWithoutData(&'static str),

    /// The machine-readable decision tree failed to load.
    #[error("decision tree: {0}")]
    DecisionTree(String),

    /// An unknown metric identifier was requested.
    #[error("unknown metric id '{0}'")]
    UnknownMetric(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// CSV-level failure not attributable to a single row.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// JSON parse failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AuditError>;
