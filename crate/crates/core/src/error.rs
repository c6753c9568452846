use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or malformed input.
    Input,
    /// Inputs parse but violate a contract or integrity rule.
    Contract,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at line {line}{}: {message}", column.as_ref().map(|c| format!(", column `{c}`")).unwrap_or_default())]
    Format {
        line: usize,
        column: Option<String>,
        message: String,
    },

    #[error("integrity error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Integrity { row: Option<usize>, message: String },

    #[error("alignment error at line {line}: {message}")]
    Alignment { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("undefined metric {metric}: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: String,
    },

    #[error("evaluation error: unmatched doc ids (predicted only: {predicted_only:?}; gold only: {gold_only:?})")]
    Evaluation {
        predicted_only: Vec<String>,
        gold_only: Vec<String>,
    },

    #[error("insufficient subspace for {group}: {found} in-vocabulary terms, need at least 2")]
    InsufficientSubspace { group: String, found: usize },

    #[error("unsatisfiable target rate {target} with {toxic} toxic examples")]
    UnsatisfiableTarget { target: f64, toxic: u64 },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Format { .. }
            | Error::Alignment { .. }
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Input,
            Error::Integrity { .. }
            | Error::Config(_)
            | Error::Contract(_)
            | Error::UndefinedMetric { .. }
            | Error::Evaluation { .. }
            | Error::InsufficientSubspace { .. }
            | Error::UnsatisfiableTarget { .. } => ErrorKind::Contract,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            column: None,
            message: message.into(),
        }
    }
}
