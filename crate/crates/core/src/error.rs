use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("operands belong to different fields GF({left}) and GF({right})")]
    FieldMismatch { left: u64, right: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("expected {expected} {what}, got {actual}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("insufficient shares: need {needed}, have {available}")]
    InsufficientShares { needed: usize, available: usize },

    #[error("duplicate evaluation point or server index {0}")]
    DuplicateShare(u64),

    #[error("{0} is not an evaluation point of this scheme")]
    UnknownPoint(u64),

    #[error("randomness source exhausted after {0} symbols")]
    RandomnessExhausted(u64),

    #[error("shares belong to different splits")]
    SchemeIdMismatch,

    #[error("inconsistent shares: {0}")]
    InconsistentShares(String),

    #[error("alpha = {alpha} is not below z/tau = {threshold}; use the single ramp profile")]
    NotComposedCase { alpha: Rational, threshold: Rational },

    #[error("access function decomposition failed: {0}")]
    Decomposition(String),

    #[error("state space of {states} inputs exceeds the enumeration limit {limit}; use the rank oracle")]
    StateSpaceTooLarge { states: u128, limit: u128 },

    #[error("grid search too large: {0}")]
    SearchTooLarge(String),

    #[error("malformed share file: {0}")]
    FileFormat(String),

    #[error("infeasible boundary values: {0}")]
    Infeasible(String),
}
