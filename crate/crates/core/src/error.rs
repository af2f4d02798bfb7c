use thiserror::Error;

/// Errors raised at module boundaries.
///
/// Falsified assertions are never errors: they are carried as report
/// content so that a run can finish and show its counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("q = {0} is not a supported prime (expected a prime below 16)")]
    NotPrime(u32),

    #[error("parameters out of supported range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("cannot parse subspace text: {0}")]
    Parse(String),

    #[error("matrix is singular")]
    Singular,

    #[error("dual automorphism requires n = 2k (n = {n}, k = {k})")]
    DualNotAllowed { n: usize, k: usize },

    #[error("wrong graph parameters: {0}")]
    WrongGraph(String),

    #[error("{0} is not in the required class")]
    NotInClass(String),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
