//! File formats: CSV datasets, canonical JSON artifacts, and tidy figure
//! data.
//!
//! JSON output is canonical so that identical runs produce byte-identical
//! files: object keys are sorted, every float is rounded to 12 significant
//! digits before serialization, and documents carry a `format_version`.
//! Wall-clock timings never appear in JSON for the same reason.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::rdgbg::GranulationResult;

pub const FORMAT_VERSION: u64 = 1;

/// Where the class label lives in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Rightmost column (the default).
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: LabelColumn,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            delimiter: b',',
            has_header: true,
            label_column: LabelColumn::Last,
        }
    }
}

fn record_line(record: &csv::StringRecord, fallback: usize) -> usize {
    record
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback)
}

/// Load a labeled dataset from CSV. Every non-label column must parse as a
/// float; the label column is taken as raw text.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let shown = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(format!("opening {shown}"), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Option<Vec<String>> = if schema.has_header {
        let h = reader
            .headers()
            .map_err(|e| Error::Parse {
                path: shown.clone(),
                row: 1,
                msg: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        Some(h)
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut label_idx: Option<usize> = match &schema.label_column {
        LabelColumn::Last => None,
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(name) => {
            let h = headers.as_ref().ok_or_else(|| {
                Error::usage("label column by name requires a header row")
            })?;
            Some(h.iter().position(|c| c == name).ok_or_else(|| {
                Error::usage(format!("label column {name:?} not found in header"))
            })?)
        }
    };

    for (i, record) in reader.records().enumerate() {
        let fallback_line = i + 1 + usize::from(schema.has_header);
        let record = record.map_err(|e| {
            let row = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(fallback_line);
            Error::Parse {
                path: shown.clone(),
                row,
                msg: e.to_string(),
            }
        })?;
        let line = record_line(&record, fallback_line);
        let width = record.len();
        let label_col = *label_idx.get_or_insert(width.saturating_sub(1));
        if label_col >= width {
            return Err(Error::usage(format!(
                "label column index {label_col} out of range for {width} columns"
            )));
        }
        let mut row = Vec::with_capacity(width - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_col {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                row: line,
                msg: format!("column {col}: {cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: shown.clone(),
                    row: line,
                    msg: format!("column {col}: non-finite value {cell:?}"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::usage(format!("{shown} has no data rows")));
    }

    let dataset = Dataset::from_rows(rows, labels)?;
    if let (Some(h), Some(label_col)) = (headers, label_idx) {
        let names: Vec<String> = h
            .into_iter()
            .enumerate()
            .filter(|(col, _)| *col != label_col)
            .map(|(_, name)| name)
            .collect();
        return dataset.with_feature_names(names);
    }
    Ok(dataset)
}

/// Write the given rows of a dataset as CSV: feature columns (original
/// values, shortest round-trip formatting) then a final `label` column with
/// the raw label text.
pub fn save_subset_csv(dataset: &Dataset, ids: &[SampleId], path: &Path) -> Result<()> {
    let shown = path.display().to_string();
    let file = fs::File::create(path).map_err(|e| Error::io(format!("creating {shown}"), e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<String> = match dataset.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..dataset.n_features()).map(|j| format!("f{j}")).collect(),
    };
    header.push("label".to_string());
    w.write_record(&header)
        .map_err(|e| Error::internal(format!("writing {shown}: {e}")))?;
    for &id in ids {
        if id >= dataset.n_samples() {
            return Err(Error::internal(format!(
                "export id {id} out of range for {} samples",
                dataset.n_samples()
            )));
        }
        let mut record: Vec<String> = dataset
            .features_of(id)
            .iter()
            .map(|v| v.to_string())
            .collect();
        record.push(dataset.label_name(dataset.label(id)).to_string());
        w.write_record(&record)
            .map_err(|e| Error::internal(format!("writing {shown}: {e}")))?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {shown}"), e))
}

/// One point of a tidy figure-data file (`group,x,y`).
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub group: String,
    pub x: f64,
    pub y: f64,
}

pub fn save_figure_csv(rows: &[FigureRow], path: &Path) -> Result<()> {
    let shown = path.display().to_string();
    let file = fs::File::create(path).map_err(|e| Error::io(format!("creating {shown}"), e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["group", "x", "y"])
        .map_err(|e| Error::internal(format!("writing {shown}: {e}")))?;
    for r in rows {
        w.write_record([r.group.as_str(), &r.x.to_string(), &r.y.to_string()])
            .map_err(|e| Error::internal(format!("writing {shown}: {e}")))?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {shown}"), e))
}

/// Round to 12 significant digits; normalizes `-0.0` to `0.0`.
fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float reparses")
}

fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().expect("f64 number");
                match Number::from_f64(sig12(f)) {
                    Some(rounded) => Value::Number(rounded),
                    None => Value::Null,
                }
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        other => other,
    }
}

/// Serialize to a canonical JSON document: sorted keys, floats at 12
/// significant digits, versioned, with a `kind` discriminator.
fn canonical_document<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    let value = serde_json::to_value(payload)
        .map_err(|e| Error::internal(format!("serializing {kind}: {e}")))?;
    let mut value = canonicalize(value);
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::internal(format!("{kind} did not serialize to an object")))?;
    obj.insert("format_version".into(), Value::from(FORMAT_VERSION));
    obj.insert("kind".into(), Value::from(kind));
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::internal(format!("serializing {kind}: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn balls_json(result: &GranulationResult) -> Result<String> {
    canonical_document("ball_set", result)
}

pub fn report_json(report: &EvalReport) -> Result<String> {
    canonical_document("eval_report", report)
}

fn write_text(text: &str, path: &Path) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn save_balls_json(result: &GranulationResult, path: &Path) -> Result<()> {
    write_text(&balls_json(result)?, path)
}

pub fn save_report_json(report: &EvalReport, path: &Path) -> Result<()> {
    write_text(&report_json(report)?, path)
}
