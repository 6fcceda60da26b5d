//! Error types shared across the pipeline.

use thiserror::Error;

/// All failures the library can report.
///
/// Variants are grouped loosely by origin: input/schema problems, data
/// shape problems, and numeric problems. The CLI maps these onto exit
/// codes, so keep the grouping stable.
#[derive(Debug, Error)]
pub enum Error {
    /// CSV header or column-name mismatch, duplicate output names.
    #[error("schema error: {0}")]
    Schema(String),

    /// Dates not strictly increasing.
    #[error("ordering error: {0}")]
    Ordering(String),

    /// Empty file, frame, or vector where data is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A column with no usable (non-missing) values.
    #[error("degenerate column: {0}")]
    DegenerateColumn(String),

    /// Indicator name not present in the registry.
    #[error("unknown indicator: {0}")]
    UnknownIndicator(String),

    /// Registering a name that already exists.
    #[error("registry conflict: {0}")]
    Conflict(String),

    /// Series shorter than an indicator's warm-up or a window's reach.
    #[error("insufficient history: need {required} rows, have {actual}")]
    InsufficientHistory { required: usize, actual: usize },

    /// Fewer samples than cross-validation folds require.
    #[error("insufficient samples: need {required}, have {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    /// Dropping warm-up rows left nothing.
    #[error("empty frame: {0}")]
    EmptyFrame(String),

    /// NaN or infinite values where finite ones are required.
    #[error("numeric input error: {0}")]
    NumericInput(String),

    /// Matrix/vector dimension mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid hyperparameter or configuration value.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A selection references a feature group that does not exist.
    #[error("unknown reference: {0}")]
    Reference(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
