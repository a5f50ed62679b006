use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("operation undefined on zero input")]
    ZeroInput,
    #[error("not a square in Q_{0}")]
    NotASquare(u64),
    #[error("the prime 2 is not allowed here")]
    EvenPrime,
    #[error("{0} is not a unit modulo {1}")]
    NonUnit(i64, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),
    #[error("operands live in different fields")]
    ContextMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is trivial (all entries zero)")]
    TrivialVector,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("Hensel criterion fails: val(g) = {value_val}, val(g') = {derivative_val}")]
    HenselCriterionFails { value_val: String, derivative_val: String },
    #[error("no zero found below the guaranteed number of variables ({0})")]
    NoZeroFoundBelowGuarantee(String),
    #[error("dimension shortfall: needed {needed}, found {found}")]
    DimensionShortfall { needed: usize, found: usize },
    #[error("missing table entry u({0})")]
    MissingTableEntry(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search space {points} exceeds limit {limit}")]
    SearchSpaceTooLarge { points: String, limit: u64 },
    #[error("a primitive zero exists: {0:?}")]
    ZeroExists(Vec<u64>),
    #[error("invalid level: {0}")]
    InvalidLevel(u32),
}

impl Error {
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::PrecisionExhausted(msg.into())
    }

    pub fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
