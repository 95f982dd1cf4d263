use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("not a cocycle: {0}")]
    NotACocycle(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("purity premise violated for relation {relation}")]
    PremiseViolated { relation: usize },

    #[error("size guard exceeded: {what} needs {needed}, limit is {limit}")]
    Guard {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("degree bound exceeded: {0}")]
    DegreeExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn guard(what: &'static str, needed: u128, limit: u128) -> Self {
        Error::Guard { what, needed, limit }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}

/// Returns `Err(Guard)` when `needed > limit`.
pub(crate) fn check_guard(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::guard(what, needed, limit))
    } else {
        Ok(())
    }
}
