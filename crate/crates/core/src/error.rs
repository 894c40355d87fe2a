use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used for process exit codes and the C ABI status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Hypothesis,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numerical => 3,
            ErrorCategory::Hypothesis => 4,
            ErrorCategory::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Hypothesis => "hypothesis",
            ErrorCategory::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} lies outside the table range [{min}, {max}]")]
    Extrapolation { value: f64, min: f64, max: f64 },

    #[error("invalid table: {0}")]
    Table(String),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("grid mismatch: expected {expected} samples, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis `{check}` violated: {detail}")]
    Hypothesis { check: &'static str, detail: String },

    #[error("eigensolver did not converge for mode {mode} after {iterations} iterations")]
    NonConvergence { mode: usize, iterations: usize },

    #[error("degenerate diagonal coefficient {value:e} at time step {step}")]
    DegenerateDiagonal { step: usize, value: f64 },

    #[error("missing configuration field `{0}`")]
    MissingField(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("in field `{field}`: {source}")]
    Field {
        field: String,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Table(_)
            | Error::MissingField(_)
            | Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::GridMismatch { .. } => ErrorCategory::Config,
            Error::Domain(_)
            | Error::Extrapolation { .. }
            | Error::Unsupported(_)
            | Error::NonConvergence { .. }
            | Error::DegenerateDiagonal { .. } => ErrorCategory::Numerical,
            Error::Hypothesis { .. } => ErrorCategory::Hypothesis,
            Error::Io { .. } => ErrorCategory::Io,
            Error::Field { source, .. } | Error::Stage { source, .. } => source.category(),
        }
    }

    /// Name of the violated hypothesis, looking through stage/field wrappers.
    pub fn hypothesis(&self) -> Option<&'static str> {
        match self {
            Error::Hypothesis { check, .. } => Some(check),
            Error::Field { source, .. } | Error::Stage { source, .. } => source.hypothesis(),
            _ => None,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_field(self, field: impl Into<String>) -> Error {
        Error::Field {
            field: field.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
