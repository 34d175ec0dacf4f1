use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Verification entry points never guess: every situation where an answer
/// cannot be certified surfaces as one of these variants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-unit divisor: {0}")]
    NonUnitDivisor(String),
    #[error("missing variable in assignment: {0}")]
    MissingVariable(String),
    #[error("scalar contains variables: {0}")]
    VariablePresent(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("singular matrix")]
    Singular,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("not symmetric: {0}")]
    NotSymmetric(String),
    #[error("inconsistent computation: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("subgroup containment violated: {0}")]
    NotContained(String),
    #[error("function is not invariant: {0}")]
    NotInvariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
