use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("prime {0} exceeds the configured cap {1}")]
    PrimeCap(u32, u32),
    #[error("p = 2 has no quadratic non-residue")]
    NoEta,
    #[error("division by zero in F_{0}")]
    DivisionByZero(u32),
    #[error("{0} is not a square mod {1}")]
    NotASquare(u32, u32),
    #[error("invalid exponent type: {0}")]
    InvalidExponentType(String),
    #[error("transform matrix X is singular")]
    SingularTransform,
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no matrix action exists for p = 2, m = (1,1,1); use the group oracle")]
    TinyCase,
    #[error("invalid family label: {0}")]
    InvalidLabel(String),
    #[error("group order {0} exceeds cap {1}")]
    OrderCap(u64, u64),
    #[error("inconsistent presentation: {0}")]
    Presentation(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
