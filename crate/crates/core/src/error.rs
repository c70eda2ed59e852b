use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants map onto three outcomes: bad input (`InvalidParameter`,
/// `Parse`, `Domain`), a certified refusal (`Hypothesis`), and an honest
/// "could not decide" (`Unknown`, `Budget`).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("undecided: {0}")]
    Unknown(String),
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub fn unknown(msg: impl Into<String>) -> Self {
        Error::Unknown(msg.into())
    }

    /// True for errors that mean "not decided" rather than "wrong".
    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::Unknown(_) | Error::Budget(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
