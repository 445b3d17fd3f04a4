use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes; the CLI maps each to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Config,
    Numeric,
    Input,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("degenerate 2x2 margin: rows ({row0}, {row1}), columns ({col0}, {col1})")]
    DegenerateMargin {
        row0: usize,
        row1: usize,
        col0: usize,
        col1: usize,
    },

    #[error("group too small: annotated={annotated}, unannotated={unannotated} (need >= 2 each)")]
    GroupTooSmall { annotated: usize, unannotated: usize },

    #[error("zero denominator in Welch statistic")]
    ZeroDenominator,

    #[error("zero Welch denominator for genes {0:?}")]
    ZeroDenominatorGenes(Vec<String>),

    #[error("no stratum of parent patterns contains both annotation states")]
    NoUsableStratum,

    #[error("non-binary value {value} at index {index}")]
    NotBinary { index: usize, value: f64 },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("term {term_id}: {source}")]
    Term {
        term_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown term {0}")]
    UnknownTerm(String),

    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),

    #[error("duplicate identifier {0}")]
    DuplicateId(String),

    #[error("empty gene universe")]
    EmptyUniverse,

    #[error("probe {0} has no gene mapping")]
    UnmappedProbe(String),

    #[error("zero standard error for statistic {0}")]
    ZeroStandardError(usize),

    #[error("adjusted p-value {value} at index {index} outside [0, 1]")]
    OutOfRangeP { index: usize, value: f64 },

    #[error("replicate {replicate} still degenerate after {attempts} draws: {reason}")]
    DegenerateReplicate {
        replicate: usize,
        attempts: usize,
        reason: String,
    },

    #[error("gene universe mismatch: {0}")]
    Alignment(String),

    #[error("reports cover different term sets")]
    TermSetMismatch,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn with_term(self, term_id: &str) -> Self {
        Error::Term {
            term_id: term_id.to_string(),
            source: Box::new(self),
        }
    }

    /// Numerical breakdown of a statistic on a particular dataset, as opposed
    /// to a malformed request. A resampled replicate hitting one of these is
    /// redrawn.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::ZeroVariance(_)
            | Error::DegenerateMargin { .. }
            | Error::GroupTooSmall { .. }
            | Error::ZeroDenominator
            | Error::ZeroDenominatorGenes(_)
            | Error::NoUsableStratum
            | Error::ZeroStandardError(_) => true,
            Error::Term { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Json(_) => ErrorKind::Parse,
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            Error::Term { source, .. } => source.kind(),
            e if e.is_degenerate() => ErrorKind::Numeric,
            Error::DegenerateReplicate { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Input,
        }
    }
}
