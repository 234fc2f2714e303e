use thiserror::Error;

/// Default cap on the number of lattice points any single enumeration may produce.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("capacity exceeded: {requested} points requested, budget is {budget}")]
    Capacity { requested: u128, budget: u64 },

    #[error("non-finite value at {context}")]
    Numeric { context: String },

    #[error("invalid parameters for {regime}: {reason}")]
    InvalidParams { regime: String, reason: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl HardyError {
    pub(crate) fn invalid(regime: impl std::fmt::Display, reason: impl Into<String>) -> Self {
        HardyError::InvalidParams {
            regime: regime.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by size limits or floating-point failure rather than bad input.
    pub fn is_capacity_or_numeric(&self) -> bool {
        matches!(self, HardyError::Capacity { .. } | HardyError::Numeric { .. })
    }
}

pub type Result<T> = std::result::Result<T, HardyError>;
