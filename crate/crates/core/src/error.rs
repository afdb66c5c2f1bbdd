use thiserror::Error;

use crate::numerics::FixedDecimal;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmmError {
    /// A fixed-point result does not fit the representable range.
    #[error("fixed-point overflow in {0}")]
    Overflow(&'static str),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector lengths or indices do not match the pool shape.
    #[error("shape error: {0}")]
    Shape(String),

    /// Malformed parameters, positions or files.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// The trade leaves the feasible arc or runs out of active liquidity.
    /// `filled_in` / `filled_out` describe the portion that could be executed.
    #[error("insufficient liquidity: {reason} (filled {filled_in} in, {filled_out} out)")]
    InsufficientLiquidity {
        reason: String,
        filled_in: FixedDecimal,
        filled_out: FixedDecimal,
    },

    /// An iterative routine did not reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl AmmError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AmmError::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        AmmError::Validation(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        AmmError::InsufficientLiquidity {
            reason: msg.into(),
            filled_in: FixedDecimal::ZERO,
            filled_out: FixedDecimal::ZERO,
        }
    }
}

pub type Result<T> = std::result::Result<T, AmmError>;
