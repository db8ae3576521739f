use thiserror::Error;

use crate::channel::ChannelLevels;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gain {0} lies outside the unit-offset interval (1, 2]")]
    GainDomain(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("channel levels {0} violate min(n11, n22) >= max(n12, n21)")]
    NotStrongDirect(ChannelLevels),

    #[error("no nonnegative allocation satisfies the decoding conditions")]
    Infeasible,

    #[error("enumeration size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("input magnitude {0} exceeds 1/4")]
    PowerConstraint(f64),

    #[error("alignment failure: decoding subspaces are linearly dependent")]
    AlignmentFailure,

    #[error("receiver output is not in the span of the decoding columns")]
    InconsistentOutput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
