//! Experiment driver: dataset ingestion, the prequential online loop, and
//! machine-readable result emission.

mod emit;
mod ingest;
mod run;

pub use emit::{emit_results, read_results};
pub use ingest::{ingest_csv, IngestedStream};
pub use run::{
    run_online, run_online_with, DatasetSource, MapChoice, RuleChoice, RunConfig, RunOutput,
    RunSummary, StepRecord, TrackingMode,
};
