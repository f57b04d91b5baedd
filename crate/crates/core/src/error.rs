use thiserror::Error;

/// Errors surfaced by the certified numerics and the constructions built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("divisor interval {0} contains zero")]
    ZeroInDivisor(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("indeterminate sign: no separation from zero found up to precision {max_precision}")]
    IndeterminateSign { max_precision: u32 },

    #[error("precision cap: requested {requested_bits} bits, achievable {achievable_bits} bits ({reason})")]
    PrecisionCap { requested_bits: u32, achievable_bits: u32, reason: String },

    #[error("argument below the range of the inverse: {0}")]
    BelowRange(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("enumerator exhausted: {0}")]
    EnumeratorExhausted(String),

    #[error("tail bound {tail} exceeds the allowed {allowed}")]
    TailTooLarge { tail: String, allowed: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
