use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("values live in different quadratic fields: sqrt({0}) vs sqrt({1})")]
    IncomparableRepresentations(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("denominator must be positive")]
    NonPositiveDenominator,

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("continued fraction of a rational terminates after {available} denominators, {requested} requested")]
    RationalExhausted { available: usize, requested: usize },

    #[error("depth must be at least {min}, got {got}")]
    InvalidDepth { min: usize, got: usize },

    #[error("{q} is the last denominator of the table")]
    EndOfTable { q: u64 },

    #[error("{q} is not a convergent denominator of alpha")]
    NotADenominator { q: u64 },

    #[error("best approximation violated at q = {q} (k = {k})")]
    ViolationFound { k: usize, q: u64 },

    #[error("min ||1/2 - j alpha|| over |j| < {q} fell below 1/(24q) at j = {j}")]
    LemmaViolated { q: u64, j: i64 },

    #[error("|a_q| reached {max} for q = {q}, above the Denjoy-Koksma bound 3")]
    BoundViolated { q: u64, max: i64 },

    #[error("partition for q = {q} is not wrap-consistent: {detail}")]
    WrapInconsistent { q: u64, detail: String },

    #[error("alpha must be irrational and lie in (0, 1)")]
    InvalidAlpha,

    #[error("coefficients exceed the fixed-width kernel range")]
    CoefficientOverflow,

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
