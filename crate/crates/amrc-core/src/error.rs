use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} out of range 1..={n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("label subset must be nonempty")]
    EmptySubset,
    #[error("degenerate innovation variance in component {component}")]
    DegenerateVariance { component: usize },
    #[error("negative variance term {value} while assembling confidence vector")]
    BrokenCovariance { value: f64 },
    #[error("subgradient row set is empty")]
    EmptyRowSet,
    #[error("confidence level delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("ingestion error at row {row}: {msg}")]
    Ingest { row: usize, msg: String },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("run aborted at step {t}: {source}")]
    Step {
        t: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
