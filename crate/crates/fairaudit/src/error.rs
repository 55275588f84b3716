use thiserror::Error;

/// Errors raised by the auditing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label token {value:?} is neither {positive:?} nor {negative:?}")]
    BadLabelToken {
        row: usize,
        value: String,
        positive: String,
        negative: String,
    },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid group spec: {0}")]
    InvalidGroupSpec(String),

    #[error("group value {0:?} does not occur in the data")]
    GroupAbsent(String),

    #[error("group value {0:?} is outside the group spec")]
    GroupOutsideSpec(String),

    #[error("group {group:?} has no rows whose true outcome is favourable; true positive rate undefined")]
    NoFavourableTruth { group: String },

    #[error("empty (group={group:?}, label={label}) cell; reweighing weight undefined")]
    EmptyCell { group: String, label: u8 },

    #[error("label class {label} has only {count} rows; need at least {need}")]
    DegenerateClass { label: u8, count: usize, need: usize },

    #[error("no row matches (group={group:?}, label={label}); cannot inject")]
    NoMatchingRows { group: String, label: u8 },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input sequence")]
    EmptyInput,

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("single-class input; need both labels present")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("case {case} failed: {source}")]
    CaseFailed {
        case: u8,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
