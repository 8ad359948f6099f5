use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain (negative amount, empty basket, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid rounding rule: {0}")]
    InvalidRule(String),

    #[error("cannot parse amount {input:?}: {reason}")]
    ParseAmount { input: String, reason: &'static str },

    /// A data file violated its format or a distribution invariant.
    #[error("{source_name}, row {row}: {message}")]
    Format {
        source_name: String,
        row: u64,
        message: String,
    },

    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("store {0:?} is not present in the scenario")]
    MissingStore(String),

    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    /// A computed result broke one of its own postconditions.
    #[error("internal invariant breached: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(source_name: &str, row: u64, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.to_owned(),
            row,
            message: message.into(),
        }
    }
}
