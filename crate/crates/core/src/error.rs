use crate::arith::Rational;

/// Errors raised by the arithmetic, class number and trace routines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("argument must be positive, got 0")]
    Zero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("weight must be even and at least 2, got {0}")]
    InvalidWeight(u32),
    #[error("{value} is not a valid discriminant here: {reason}")]
    InvalidDiscriminant { value: i64, reason: &'static str },
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("s^2 = {0} is outside 0..=4")]
    SSquaredOutOfRange(i64),
    #[error("expected an integer from {context}, got {value}")]
    NonIntegral { context: String, value: Rational },
    #[error("level {0} is not the square of a squarefree integer greater than 1")]
    NotSquareOfSquarefree(u64),
    #[error("tr W_{n} = {full} at weight {k}, but the newspace traces sum to {summed}")]
    InconsistentTraces { n: u64, k: u32, full: i64, summed: i64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks that `k` is an even weight `>= 2`.
pub fn check_weight(k: u32) -> Result<()> {
    if k >= 2 && k.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::InvalidWeight(k))
    }
}
