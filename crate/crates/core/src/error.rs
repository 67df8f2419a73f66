use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no samples")]
    NoSamples,
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("feature matrix has {found} values, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("row {row}: label {label} is out of range for {num_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        num_classes: usize,
    },
    #[error("{algorithm} needs K >= {required} classes, dataset has {found}")]
    TooFewClasses {
        algorithm: &'static str,
        found: usize,
        required: usize,
    },
    #[error("column {column} out of range for {num_features} features")]
    ColumnOutOfRange { column: usize, num_features: usize },
    #[error("column {column} listed twice")]
    DuplicateColumn { column: usize },
    #[error("row {row}, column {column}: code {value} is not an integer in 0..{cardinality}")]
    CodeOutOfRange {
        row: usize,
        column: usize,
        value: f64,
        cardinality: usize,
    },
    #[error("need at least {required} samples, got {found}")]
    TooFewSamples { found: usize, required: usize },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("feature vector has {found} values, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("class {class} cannot be its own base class")]
    BaseIsClass { class: usize },
    #[error("training loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("training log has no monitor errors")]
    NoMonitorData,
    #[error("invalid error counts: e1={e1}, e2={e2}, n={n}")]
    InvalidCounts { e1: u64, e2: u64, n: u64 },
}
