use thiserror::Error;

use crate::search::PartialReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (zero inverse, composite modulus, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed its configured size budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The exact search was cut short; the attached report is a lower bound only.
    #[error("search budget exhausted after {} nodes; best length so far {}", .0.nodes_visited, .0.best_length)]
    BudgetExhausted(Box<PartialReport>),

    /// A constructed witness failed verification. Never expected on a correct build.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
