use thiserror::Error;

use crate::control::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value fell outside a closed interval. `what` names the quantity and the
    /// violated bound is reported verbatim.
    #[error("{what} = {value} is out of range: must be {bound}")]
    Range {
        what: String,
        value: f64,
        bound: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("command `{command}` is not allowed in mode {mode}")]
    IllegalCommand { command: String, mode: Mode },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::Config(_) => "config",
            Error::Degenerate(_) => "degenerate",
            Error::Input(_) => "input",
            Error::Planning(_) => "planning",
            Error::IllegalCommand { .. } => "illegal_command",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn range(what: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Error::Range {
            what: what.into(),
            value,
            bound: format!("within [{lo}, {hi}]"),
        }
    }

    pub(crate) fn range_bound(what: impl Into<String>, value: f64, bound: impl Into<String>) -> Self {
        Error::Range {
            what: what.into(),
            value,
            bound: bound.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Input(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Input(format!("json: {e}"))
    }
}
