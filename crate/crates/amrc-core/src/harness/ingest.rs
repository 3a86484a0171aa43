//! CSV ingestion with online feature standardization.
//!
//! Rows are consumed in file order, which is taken as time order. Features
//! are standardized using statistics of strictly earlier rows only, so no
//! information travels backwards in time. Labels are mapped to `1..=|Y|` in
//! order of first appearance.

use std::path::Path;

use crate::error::{Error, Result};
use crate::feature_map::Label;

/// A fully ingested stream: standardized instances with mapped labels.
#[derive(Debug, Clone)]
pub struct IngestedStream {
    pub instances: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub n_classes: usize,
    /// Original label strings, indexed by mapped label minus one.
    pub label_names: Vec<String>,
    pub n_features: usize,
}

/// Running mean and variance accumulator (Welford's recurrence).
struct RunningStats {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    fn new(dim: usize) -> Self {
        RunningStats { n: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.n as f64;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    /// Standardizes `x` with the statistics accumulated so far. With no
    /// past rows the output is all zeros; a zero past variance falls back
    /// to centering only.
    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; x.len()];
        }
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let var = if self.n > 1 { self.m2[i] / (self.n - 1) as f64 } else { 0.0 };
                let std = var.sqrt();
                if std > 0.0 {
                    (v - self.mean[i]) / std
                } else {
                    v - self.mean[i]
                }
            })
            .collect()
    }
}

/// Returns true when any feature cell of the record fails to parse as a
/// number, in which case the record is treated as a header.
fn looks_like_header(record: &csv::StringRecord, label_column: usize) -> bool {
    record
        .iter()
        .enumerate()
        .any(|(i, cell)| i != label_column && cell.trim().parse::<f64>().is_err())
}

/// Reads a labeled stream from a CSV file. `label_column` selects the label
/// field (default: last column). A header row is detected by non-numeric
/// feature cells and skipped.
pub fn ingest_csv(path: &Path, label_column: Option<usize>) -> Result<IngestedStream> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;

    let mut instances = Vec::new();
    let mut labels = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut stats: Option<RunningStats> = None;
    let mut n_features = 0usize;
    let mut first_data_row = true;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if record.is_empty() || (record.len() == 1 && record[0].trim().is_empty()) {
            continue;
        }
        let label_col = label_column.unwrap_or(record.len() - 1);
        if label_col >= record.len() {
            return Err(Error::Ingest {
                row,
                msg: format!(
                    "label column {label_col} out of range for {} fields",
                    record.len()
                ),
            });
        }
        if first_data_row && looks_like_header(&record, label_col) {
            first_data_row = false;
            continue;
        }
        first_data_row = false;

        let mut raw = Vec::with_capacity(record.len() - 1);
        for (i, cell) in record.iter().enumerate() {
            if i == label_col {
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Ingest {
                row,
                msg: format!("non-numeric feature cell {:?} in column {i}", cell),
            })?;
            raw.push(v);
        }
        if stats.is_none() {
            n_features = raw.len();
            stats = Some(RunningStats::new(n_features));
        }
        if raw.len() != n_features {
            return Err(Error::Ingest {
                row,
                msg: format!("expected {n_features} features, got {}", raw.len()),
            });
        }

        let name = record[label_col].trim().to_string();
        let label = match label_names.iter().position(|n| *n == name) {
            Some(pos) => pos + 1,
            None => {
                label_names.push(name);
                label_names.len()
            }
        };

        let stats = stats.as_mut().unwrap();
        instances.push(stats.standardize(&raw));
        stats.push(&raw);
        labels.push(label);
    }

    if instances.is_empty() {
        return Err(Error::Ingest { row: 0, msg: "no data rows found".into() });
    }
    if label_names.len() < 2 {
        return Err(Error::Ingest {
            row: 0,
            msg: format!("need at least two distinct labels, found {}", label_names.len()),
        });
    }

    Ok(IngestedStream {
        instances,
        labels,
        n_classes: label_names.len(),
        label_names,
        n_features,
    })
}
