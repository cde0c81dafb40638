use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid p-adic context: {0}")]
    InvalidContext(String),
    #[error("operands live in different p-adic contexts")]
    ContextMismatch,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular at the working precision")]
    SingularAtPrecision,
    #[error("polynomial does not split over Q_p at the working precision: {0}")]
    NotSplitAtPrecision(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("Ad_a is not diagonalizable over Q_p: {0}")]
    NotDiagonalizable(String),
    #[error("every eigenvalue of Ad_a has p-adic norm one")]
    NoHyperbolicity,
    #[error("contracting and expanding valuations disagree ({stable} vs {unstable}); group is not unimodular")]
    NotUnimodular { stable: u64, unstable: u64 },
    #[error("level too small: {0}")]
    LevelTooSmall(String),
    #[error("enumeration budget exceeded: {points} points > {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("support mismatch: q_{0} > 0 where p_{0} = 0")]
    SupportMismatch(usize),
    #[error("symbol count {symbols} differs from p^|nu| = {expected}")]
    SymbolCountMismatch { symbols: usize, expected: u64 },
    #[error("negative exponent in Cartan data at position {0}; list must be descending")]
    NegativeExponent(usize),
    #[error("geometric series diverges: ||a|| = {0} <= 1")]
    DivergentSeries(f64),
    #[error("negative entropy gap {0}")]
    NegativeGap(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
