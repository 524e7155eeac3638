use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A certification step could not separate 0 from p^N.
    #[error("precision insufficient: {msg}")]
    Precision { msg: String, retry: Option<u32> },
    /// A truncated polynomial computation left its degree window.
    #[error("degree window overflow: {msg}")]
    Window { msg: String, needed: Option<i64> },
    /// The hypothesis of a check is not met; not a failure of the statement.
    #[error("not applicable: {0}")]
    Inapplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision { msg: msg.into(), retry: None }
    }

    pub fn precision_retry(msg: impl Into<String>, retry: u32) -> Self {
        Error::Precision { msg: msg.into(), retry: Some(retry) }
    }

    pub fn window(msg: impl Into<String>) -> Self {
        Error::Window { msg: msg.into(), needed: None }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
