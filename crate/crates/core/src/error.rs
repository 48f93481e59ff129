use thiserror::Error;

/// Crate-wide error type. Every variant maps to a stable kebab-case code via
/// [`Error::code`], which the CLI prints as a machine-parsable diagnostic
/// prefix.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cube is {cube_rows}x{cube_cols}, ground truth is {gt_rows}x{gt_cols}")]
    DimensionMismatch {
        cube_rows: usize,
        cube_cols: usize,
        gt_rows: usize,
        gt_cols: usize,
    },

    #[error("label {label} at ({row}, {col}) exceeds declared class count {n_classes}")]
    LabelOutOfRange {
        row: usize,
        col: usize,
        label: u32,
        n_classes: u16,
    },

    #[error("ground truth has fewer than two distinct nonzero labels")]
    DegenerateGroundTruth,

    #[error("{0}")]
    InvalidShape(String),

    #[error("{0}")]
    NonFiniteInput(String),

    #[error("input array is empty")]
    EmptyInput,

    #[error("arrays have lengths {a} and {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("code {code} is not below alphabet size {alphabet}")]
    CodeOutOfRange { code: u32, alphabet: usize },

    #[error("band index {band} is not below band count {n_bands}")]
    BandOutOfRange { band: usize, n_bands: usize },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("n_classes must be at least 2, got {0}")]
    TooFewClasses(usize),

    #[error("band set is empty")]
    EmptyBandSet,

    #[error("no training pixels available")]
    EmptyTrainSet,

    #[error("no test pixels available")]
    EmptyTestSet,

    #[error("{path}: header does not start with a valid \"HSIC 1\" line ({detail})")]
    BadMagic { path: String, detail: String },

    #[error("{path}: payload ends early, expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: String,
        expected: u64,
        found: u64,
    },

    #[error("{path}: dtype {dtype:?} is not one of u16, f32")]
    UnknownDtype { path: String, dtype: String },

    #[error("{path}: trailing bytes after payload")]
    TrailingData { path: String },

    #[error("{path}: row {row} has {len} columns, expected {expected}")]
    RaggedRows {
        path: String,
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("{path}: negative label {value:?} at row {row}")]
    NegativeLabels {
        path: String,
        row: usize,
        value: String,
    },

    #[error("{path}: row {row}: cannot parse {value:?} as a label")]
    InvalidLabel {
        path: String,
        row: usize,
        value: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// Stable kebab-case diagnostic code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::LabelOutOfRange { .. } => "label-out-of-range",
            Error::DegenerateGroundTruth => "degenerate-gt",
            Error::InvalidShape(_) => "invalid-shape",
            Error::NonFiniteInput(_) => "non-finite-input",
            Error::EmptyInput => "empty-input",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::CodeOutOfRange { .. } => "code-out-of-range",
            Error::BandOutOfRange { .. } => "band-out-of-range",
            Error::InvalidConfig(_) => "invalid-config",
            Error::TooFewClasses(_) => "too-few-classes",
            Error::EmptyBandSet => "empty-band-set",
            Error::EmptyTrainSet => "empty-train-set",
            Error::EmptyTestSet => "empty-test-set",
            Error::BadMagic { .. } => "bad-magic",
            Error::TruncatedPayload { .. } => "truncated-payload",
            Error::UnknownDtype { .. } => "unknown-dtype",
            Error::TrailingData { .. } => "trailing-data",
            Error::RaggedRows { .. } => "ragged-rows",
            Error::NegativeLabels { .. } => "negative-labels",
            Error::InvalidLabel { .. } => "invalid-label",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
