//! Loads prediction tables from CSV or JSON into an [`AuditDataset`] under an
//! explicit column schema.
//!
//! Rows with a missing label or group fail the load with a row-indexed error;
//! nothing is dropped silently. Optional fields (score, features, prediction
//! when a score column exists) may be empty.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::model::{AuditDataset, AuditRecord};

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Json,
}

/// Column mapping and label conventions for one input table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    /// Column holding the true outcome.
    pub label_column: String,
    /// Column holding the group key (sensitive attribute).
    pub group_column: String,
    /// Column holding the hard binary prediction, if any.
    #[serde(default)]
    pub prediction_column: Option<String>,
    /// Column holding the continuous score in [0, 1], if any.
    #[serde(default)]
    pub score_column: Option<String>,
    /// Columns holding real-valued features for individual fairness.
    #[serde(default)]
    pub feature_columns: Vec<String>,
    /// Literal label value mapped to outcome 1.
    #[serde(default = "default_positive_label")]
    pub positive_label: String,
    /// When set, any label other than positive/negative is a `BadLabel`
    /// error. When unset, every non-positive label maps to 0.
    #[serde(default)]
    pub negative_label: Option<String>,
    /// Classification threshold applied to scores after loading.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_positive_label() -> String {
    "1".to_string()
}

impl SchemaConfig {
    /// Minimal schema: label, group, and a hard-prediction column.
    pub fn with_prediction(
        label_column: impl Into<String>,
        prediction_column: impl Into<String>,
        group_column: impl Into<String>,
    ) -> Self {
        Self {
            label_column: label_column.into(),
            group_column: group_column.into(),
            prediction_column: Some(prediction_column.into()),
            score_column: None,
            feature_columns: Vec::new(),
            positive_label: default_positive_label(),
            negative_label: None,
            threshold: None,
        }
    }

    /// Minimal schema: label, group, and a score column.
    pub fn with_score(
        label_column: impl Into<String>,
        score_column: impl Into<String>,
        group_column: impl Into<String>,
    ) -> Self {
        Self {
            label_column: label_column.into(),
            group_column: group_column.into(),
            prediction_column: None,
            score_column: Some(score_column.into()),
            feature_columns: Vec::new(),
            positive_label: default_positive_label(),
            negative_label: None,
            threshold: None,
        }
    }

    /// Reads a schema from a JSON config file.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        let schema: SchemaConfig = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    /// Checks the schema's own invariants.
    pub fn validate(&self) -> Result<()> {
        if self.prediction_column.is_none() && self.score_column.is_none() {
            return Err(AuditError::InvalidSchema(
                "declare a prediction column or a score column".into(),
            ));
        }
        if self.threshold.is_some() && self.score_column.is_none() {
            return Err(AuditError::InvalidSchema(
                "a threshold needs a score column".into(),
            ));
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(AuditError::InvalidSchema(format!(
                    "threshold {t} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn parse_binary(&self, raw: &str, row: usize) -> Result<bool> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(AuditError::BadLabel {
                row,
                value: String::new(),
            });
        }
        if raw == self.positive_label {
            return Ok(true);
        }
        match &self.negative_label {
            Some(neg) if raw == neg => Ok(false),
            Some(_) => Err(AuditError::BadLabel {
                row,
                value: raw.to_string(),
            }),
            None => Ok(false),
        }
    }
}

/// Loads a file into an [`AuditDataset`] under `schema`, applying the
/// schema's threshold (if any) afterwards.
pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DataFormat,
    schema: &SchemaConfig,
) -> Result<AuditDataset> {
    schema.validate()?;
    let rows = match format {
        DataFormat::Csv => read_csv_rows(path.as_ref())?,
        DataFormat::Json => read_json_rows(path.as_ref())?,
    };
    let dataset = rows_to_dataset(&rows, schema)?;
    match schema.threshold {
        Some(t) => apply_threshold(&dataset, t),
        None => Ok(dataset),
    }
}

/// One flat row: column name → raw cell text. Missing JSON keys are absent;
/// missing CSV cells are empty strings.
type Row = BTreeMap<String, String>;

fn read_csv_rows(path: &Path) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (idx, result) in reader.records().enumerate() {
        let record = result.map_err(|e| AuditError::ParseError {
            row: idx + 1,
            message: e.to_string(),
        })?;
        let row: Row = headers
            .iter()
            .cloned()
            .zip(record.iter().map(str::to_string))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

fn read_json_rows(path: &Path) -> Result<Vec<Row>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let values: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_str(&text)?;
    let rows = values
        .into_iter()
        .map(|obj| {
            obj.into_iter()
                .map(|(k, v)| {
                    let text = match v {
                        serde_json::Value::String(s) => s,
                        serde_json::Value::Null => String::new(),
                        other => other.to_string(),
                    };
                    (k, text)
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

fn rows_to_dataset(rows: &[Row], schema: &SchemaConfig) -> Result<AuditDataset> {
    // Column presence is checked against the first row (JSON) or the header
    // (CSV, where every row carries all header keys).
    if let Some(first) = rows.first() {
        for column in required_columns(schema) {
            if !first.contains_key(column) {
                return Err(AuditError::MissingColumn(column.to_string()));
            }
        }
    }
    let mut records = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        let row_no = idx + 1;
        records.push(row_to_record(row, schema, row_no)?);
    }
    AuditDataset::new(records)
}

fn required_columns(schema: &SchemaConfig) -> Vec<&str> {
    let mut cols = vec![schema.label_column.as_str(), schema.group_column.as_str()];
    if let Some(c) = &schema.prediction_column {
        cols.push(c);
    }
    if let Some(c) = &schema.score_column {
        cols.push(c);
    }
    for c in &schema.feature_columns {
        cols.push(c);
    }
    cols
}

fn row_to_record(row: &Row, schema: &SchemaConfig, row_no: usize) -> Result<AuditRecord> {
    let cell = |name: &str| -> Result<&str> {
        row.get(name)
            .map(String::as_str)
            .ok_or_else(|| AuditError::MissingColumn(name.to_string()))
    };

    let label_raw = cell(&schema.label_column)?;
    let true_outcome = schema.parse_binary(label_raw, row_no)?;

    let group = cell(&schema.group_column)?.trim();
    if group.is_empty() {
        return Err(AuditError::ParseError {
            row: row_no,
            message: format!("missing group value in column '{}'", schema.group_column),
        });
    }

    let predicted_outcome = match &schema.prediction_column {
        Some(col) => {
            let raw = cell(col)?;
            if raw.trim().is_empty() && schema.score_column.is_some() {
                None
            } else {
                Some(schema.parse_binary(raw, row_no)?)
            }
        }
        None => None,
    };

    let score = match &schema.score_column {
        Some(col) => {
            let raw = cell(col)?.trim();
            if raw.is_empty() {
                None
            } else {
                let value: f64 = raw.parse().map_err(|_| AuditError::ParseError {
                    row: row_no,
                    message: format!("cannot parse score '{raw}'"),
                })?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(AuditError::BadScore { row: row_no, value });
                }
                Some(value)
            }
        }
        None => None,
    };

    let features = if schema.feature_columns.is_empty() {
        None
    } else {
        let raw_cells: Vec<&str> = schema
            .feature_columns
            .iter()
            .map(|c| cell(c).map(str::trim))
            .collect::<Result<_>>()?;
        if raw_cells.iter().all(|c| c.is_empty()) {
            None
        } else {
            let parsed: Vec<f64> = raw_cells
                .iter()
                .map(|raw| {
                    raw.parse().map_err(|_| AuditError::ParseError {
                        row: row_no,
                        message: format!("cannot parse feature value '{raw}'"),
                    })
                })
                .collect::<Result<_>>()?;
            Some(parsed)
        }
    };

    if predicted_outcome.is_none() && score.is_none() {
        return Err(AuditError::ParseError {
            row: row_no,
            message: "row has neither a prediction nor a score".into(),
        });
    }

    AuditRecord::new(true_outcome, predicted_outcome, score, group, features)
}

/// Returns a new dataset with `predicted_outcome = 1` iff `score >= t`.
/// The input dataset is left untouched.
pub fn apply_threshold(dataset: &AuditDataset, t: f64) -> Result<AuditDataset> {
    if !(0.0..=1.0).contains(&t) {
        return Err(AuditError::InvalidSchema(format!(
            "threshold {t} is outside [0, 1]"
        )));
    }
    let records = dataset
        .records()
        .iter()
        .enumerate()
        .map(|(idx, record)| {
            let score = record.score().ok_or(AuditError::MissingScore(idx))?;
            Ok(record.with_replaced_prediction(score >= t))
        })
        .collect::<Result<Vec<_>>>()?;
    AuditDataset::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    fn basic_schema() -> SchemaConfig {
        SchemaConfig::with_prediction("y", "yhat", "g")
    }

    #[test]
    fn loads_two_row_csv() {
        let file = write_temp("y,yhat,g\n1,1,A\n0,1,B\n", ".csv");
        let dataset = load_dataset(file.path(), DataFormat::Csv, &basic_schema()).unwrap();
        assert_eq!(dataset.len(), 2);
        assert_eq!(
            dataset.group_keys().iter().cloned().collect::<Vec<_>>(),
            vec!["A", "B"]
        );
        assert!(dataset.records()[0].true_outcome());
        assert_eq!(dataset.records()[1].predicted_outcome(), Some(true));
        assert!(!dataset.records()[1].true_outcome());
    }

    #[test]
    fn rejects_out_of_range_score_with_row_index() {
        let schema = SchemaConfig::with_score("y", "s", "g");
        let file = write_temp("y,s,g\n1,1.3,A\n", ".csv");
        let err = load_dataset(file.path(), DataFormat::Csv, &schema).unwrap_err();
        match err {
            AuditError::BadScore { row, value } => {
                assert_eq!(row, 1);
                assert_eq!(value, 1.3);
            }
            other => panic!("expected BadScore, got {other:?}"),
        }
    }

    #[test]
    fn reports_missing_column_by_name() {
        let file = write_temp("y,g\n1,A\n", ".csv");
        let err = load_dataset(file.path(), DataFormat::Csv, &basic_schema()).unwrap_err();
        match err {
            AuditError::MissingColumn(name) => assert_eq!(name, "yhat"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_label_with_row_index() {
        let file = write_temp("y,yhat,g\n1,1,A\n,0,B\n", ".csv");
        let err = load_dataset(file.path(), DataFormat::Csv, &basic_schema()).unwrap_err();
        match err {
            AuditError::BadLabel { row, .. } => assert_eq!(row, 2),
            other => panic!("expected BadLabel, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_group_with_row_index() {
        let file = write_temp("y,yhat,g\n1,1,A\n0,0,\n", ".csv");
        let err = load_dataset(file.path(), DataFormat::Csv, &basic_schema()).unwrap_err();
        match err {
            AuditError::ParseError { row, .. } => assert_eq!(row, 2),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn strict_negative_label_rejects_strays() {
        let mut schema = basic_schema();
        schema.positive_label = "yes".into();
        schema.negative_label = Some("no".into());
        let file = write_temp("y,yhat,g\nyes,yes,A\nmaybe,no,B\n", ".csv");
        let err = load_dataset(file.path(), DataFormat::Csv, &schema).unwrap_err();
        match err {
            AuditError::BadLabel { row, value } => {
                assert_eq!(row, 2);
                assert_eq!(value, "maybe");
            }
            other => panic!("expected BadLabel, got {other:?}"),
        }
    }

    #[test]
    fn loads_json_array_of_objects() {
        let file = write_temp(
            r#"[{"y": 1, "yhat": 1, "g": "A"}, {"y": 0, "yhat": 1, "g": "B"}]"#,
            ".json",
        );
        let dataset = load_dataset(file.path(), DataFormat::Json, &basic_schema()).unwrap();
        assert_eq!(dataset.len(), 2);
        assert_eq!(dataset.group_keys().len(), 2);
    }

    #[test]
    fn loads_features_and_scores() {
        let mut schema = SchemaConfig::with_score("y", "s", "g");
        schema.feature_columns = vec!["x1".into(), "x2".into()];
        let file = write_temp("y,s,g,x1,x2\n1,0.9,A,1.0,2.0\n0,0.2,B,0.5,0.5\n", ".csv");
        let dataset = load_dataset(file.path(), DataFormat::Csv, &schema).unwrap();
        assert_eq!(dataset.feature_dimension(), Some(2));
        assert_eq!(dataset.records()[0].features(), Some(&[1.0, 2.0][..]));
        assert!(dataset.has_scores());
    }

    #[test]
    fn schema_threshold_requires_score_column() {
        let mut schema = basic_schema();
        schema.threshold = Some(0.5);
        assert!(matches!(
            schema.validate(),
            Err(AuditError::InvalidSchema(_))
        ));
    }

    #[test]
    fn threshold_splits_at_boundary_inclusive() {
        let records = vec![
            AuditRecord::with_score(false, 0.4, "A").unwrap(),
            AuditRecord::with_score(true, 0.6, "B").unwrap(),
        ];
        let dataset = AuditDataset::new(records).unwrap();
        let out = apply_threshold(&dataset, 0.5).unwrap();
        assert_eq!(out.records()[0].predicted_outcome(), Some(false));
        assert_eq!(out.records()[1].predicted_outcome(), Some(true));
        // tie rule: score >= t is positive
        let tie = AuditDataset::new(vec![AuditRecord::with_score(true, 0.5, "A").unwrap()])
            .unwrap();
        let out = apply_threshold(&tie, 0.5).unwrap();
        assert_eq!(out.records()[0].predicted_outcome(), Some(true));
    }

    #[test]
    fn threshold_is_idempotent_and_preserves_input() {
        let records = vec![
            AuditRecord::with_score(false, 0.3, "A").unwrap(),
            AuditRecord::with_score(true, 0.8, "B").unwrap(),
        ];
        let dataset = AuditDataset::new(records).unwrap();
        let once = apply_threshold(&dataset, 0.5).unwrap();
        let twice = apply_threshold(&once, 0.5).unwrap();
        assert_eq!(once, twice);
        assert_eq!(dataset.records()[0].predicted_outcome(), None);
    }

    #[test]
    fn threshold_requires_scores_everywhere() {
        let records = vec![AuditRecord::with_prediction(true, true, "A")];
        let dataset = AuditDataset::new(records).unwrap();
        assert!(matches!(
            apply_threshold(&dataset, 0.5),
            Err(AuditError::MissingScore(0))
        ));
    }
}
