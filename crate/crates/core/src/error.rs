use std::io;

use crate::model::SelectionTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // subsets and trial sets
    #[error("channel subset is empty")]
    EmptySubset,
    #[error("channel index {index} out of range for {channels} channels")]
    IndexOutOfRange { index: usize, channels: usize },
    #[error("subset mask has no bits set")]
    AllZeroMask,
    #[error("invalid montage: {0}")]
    InvalidMontage(String),
    #[error("invalid trial set: {0}")]
    InvalidTrialSet(String),

    // ETS / CSV / synth
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic: expected \"ETS1\"")]
    BadMagic,
    #[error("cannot parse ETS header: {0}")]
    HeaderParse(String),
    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at flat index {0}")]
    NonFiniteSample(usize),
    #[error("ragged CSV: row {row} has {found} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("bad label {label:?} on row {row}")]
    BadLabel { row: usize, label: String },
    #[error("bad number on row {row}, column {col}: {text:?}")]
    BadNumber { row: usize, col: usize, text: String },
    #[error("CSV shape: {0}")]
    CsvShape(String),
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),

    // evaluation
    #[error("class {class} has {count} trials, fewer than the number of folds")]
    ClassTooSmall { class: u32, count: usize },
    #[error("invalid evaluator config: {0}")]
    InvalidConfig(String),
    #[error("pooled covariance is singular")]
    SingularCovariance,
    #[error("timed out waiting for external evaluator")]
    ProtocolTimeout,
    #[error("malformed protocol record: {0}")]
    ProtocolMalformed(String),
    #[error("external evaluator reported: {0}")]
    EvaluatorError(String),
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyOutOfRange(f64),
    #[error("external evaluator exited (code {0:?})")]
    ProcessExited(Option<i32>),

    // selection
    #[error("{0} channels exceed the exhaustive-search guard of {1}")]
    TooManyChannels(usize, usize),
    #[error("sampling produced {0} consecutive empty subsets")]
    DegenerateSampling(usize),
    #[error("masks and weights differ in length ({masks} vs {weights})")]
    LengthMismatch { masks: usize, weights: usize },
    #[error("mask width {found} differs from {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid selector config: {0}")]
    InvalidSelector(String),
    #[error("no channel matched the region")]
    EmptyRegion,
    #[error("channel {0:?} is not in the montage")]
    UnknownName(String),
    #[error("search aborted after {} completed steps: {source}", trace.steps.len())]
    Aborted {
        trace: Box<SelectionTrace>,
        source: Box<Error>,
    },
}

impl Error {
    /// The underlying failure, looking through [`Error::Aborted`].
    pub fn root(&self) -> &Error {
        match self {
            Error::Aborted { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_protocol(&self) -> bool {
        matches!(
            self.root(),
            Error::ProtocolTimeout
                | Error::ProtocolMalformed(_)
                | Error::EvaluatorError(_)
                | Error::AccuracyOutOfRange(_)
                | Error::ProcessExited(_)
        )
    }
}
