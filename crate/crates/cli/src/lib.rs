//! Command-line surface for the fcrystal library: the crystal document
//! format, structured reports, the bundled examples and the acceptance
//! suite shared by `verify-all` and the integration tests.

pub mod bundled;
pub mod commands;
pub mod doc;
pub mod report;
pub mod suite;

use std::fmt;

/// Errors surfaced to the command line, each with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Malformed or inconsistent input: exit 2.
    Input(String),
    /// A library error while computing.
    Compute(fcrystal::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(fcrystal::Error::Precision { .. } | fcrystal::Error::Window { .. }) => 3,
            CliError::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Compute(fcrystal::Error::Precision { msg, retry: Some(n) }) => {
                write!(f, "precision insufficient: {msg} (retry with --precision {n})")
            }
            CliError::Compute(fcrystal::Error::Window { msg, needed: Some(w) }) => {
                write!(f, "degree window overflow: {msg} (retry with --window {w})")
            }
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fcrystal::Error> for CliError {
    fn from(e: fcrystal::Error) -> Self {
        CliError::Compute(e)
    }
}
