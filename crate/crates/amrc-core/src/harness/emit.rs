//! Result emission: a per-step CSV trace plus a JSON summary next to it.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::harness::run::{RunOutput, StepRecord};

const HEADER: [&str; 11] = [
    "t",
    "y_true",
    "y_rand",
    "y_det",
    "mistake_rand",
    "mistake_det",
    "r_u",
    "cum_mistake_rate_rand",
    "cum_mistake_rate_det",
    "cum_bound_per_step",
    "wall_time_ms",
];

/// Path of the JSON summary written next to the CSV trace.
fn summary_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

/// Writes the per-step records as CSV at `path` and the run summary as JSON
/// at the same path with a `.json` extension.
pub fn emit_results(output: &RunOutput, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    if output.records.is_empty() {
        writer.write_record(HEADER)?;
    }
    for record in &output.records {
        writer.serialize(record)?;
    }
    writer.flush()?;

    let mut summary_file = File::create(summary_path(path))?;
    let json = serde_json::to_string_pretty(&output.summary)
        .expect("summary serialization cannot fail");
    summary_file.write_all(json.as_bytes())?;
    summary_file.write_all(b"\n")?;
    Ok(())
}

/// Reads back a per-step CSV trace written by [`emit_results`].
pub fn read_results(path: &Path) -> Result<Vec<StepRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for record in reader.deserialize() {
        records.push(record?);
    }
    Ok(records)
}
