use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // --- data / ingestion ---
    #[error("name is empty after normalization{}", line_suffix(*.line))]
    EmptyAfterNormalization { line: Option<usize> },
    #[error("malformed row at line {line}: expected `name,gender`")]
    MalformedRow { line: usize },
    #[error("unknown gender label `{value}` (expected m, f, male or female)")]
    UnknownGenderLabel { value: String },
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("invalid fraction {0}: must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    // --- features ---
    #[error("invalid n-gram size {0}: must be in 2..=5")]
    InvalidN(usize),
    #[error("negative feature value {value} at row {row}, column {col}")]
    NegativeFeatureValue { row: usize, col: usize, value: f64 },
    #[error("label count {labels} does not match row count {rows}")]
    LabelMismatch { rows: usize, labels: usize },
    #[error("name `{name}` has {len} characters, indexer max_len is {max_len}")]
    TooLong { name: String, len: usize, max_len: usize },
    #[error("character {ch:?} was not seen when the character index was fitted")]
    UnknownCharacter { ch: char },

    // --- models ---
    #[error("training labels contain a single class; need both male and female samples")]
    SingleClassInput,
    #[error("feature row has width {got}, model expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("non-finite value in input at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("index {index} is outside the embedding table of {rows} rows")]
    IndexOutOfVocabulary { index: usize, rows: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("training diverged: {0}")]
    TrainingDiverged(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    // --- cli / artifacts ---
    #[error("method `{method}` cannot be paired with features `{features}`")]
    IncompatiblePair { method: String, features: String },
    #[error("operation requires a {expected} model, artifact holds {found}")]
    WrongModelKind { expected: &'static str, found: String },
    #[error("artifact format version {found} is not supported (expected {expected})")]
    ArtifactVersion { expected: u32, found: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end:
    /// 2 usage error, 3 data error, 4 training failure.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            IncompatiblePair { .. }
            | InvalidArgument(_)
            | InvalidFraction(_)
            | InvalidN(_)
            | InvalidHyperparameter(_)
            | WrongModelKind { .. } => 2,
            EmptyAfterNormalization { .. }
            | MalformedRow { .. }
            | UnknownGenderLabel { .. }
            | EmptyInput(_)
            | NegativeFeatureValue { .. }
            | LabelMismatch { .. }
            | TooLong { .. }
            | UnknownCharacter { .. }
            | WidthMismatch { .. }
            | IndexOutOfVocabulary { .. }
            | ArtifactVersion { .. }
            | Io { .. }
            | Csv(_)
            | Json(_) => 3,
            TooFewSamples(_)
            | SingleClassInput
            | NonFiniteInput { .. }
            | ShapeMismatch(_)
            | TrainingDiverged(_)
            | LengthMismatch { .. } => 4,
        }
    }
}
