use thiserror::Error;

/// Errors raised by the exact, homological and numeric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EacError {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("W has trivial class; not free")]
    TrivialClass,

    #[error("cannot build T' with T ∩ T' = L: {0}")]
    ComplementFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("genericity failure; resample ({0})")]
    GenericityFailure(String),

    #[error("contour too close to a zero; re-jitter")]
    ContourTooClose,

    #[error("degenerate fiber: {0}")]
    DegenerateFiber(String),

    #[error("nondegeneracy assertion contradicted at sample {sample}: {detail}")]
    AssertionContradicted { sample: String, detail: String },

    #[error("point at infinity")]
    AtInfinity,

    #[error("point is not on W (residual {0:.3e})")]
    OffVariety(f64),
}

pub type Result<T, E = EacError> = std::result::Result<T, E>;
