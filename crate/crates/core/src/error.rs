use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid bracket: lower end {lo} is not below upper end {hi}")]
    InvalidBracket { lo: String, hi: String },

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: String, hi: String },

    #[error("expression could not be evaluated at {precision} bits: {reason}")]
    EvaluationFailure { precision: u32, reason: String },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("value outside the attainable range: {0}")]
    Range(String),

    #[error("index out of range: m = {m}, k = {k}")]
    IndexOutOfRange { m: u32, k: i64 },

    #[error("{s} is not in the support of X_{m}")]
    NotInSupport { m: u32, s: i64 },

    #[error("invalid moment generator `{name}`: {reason}")]
    InvalidMgf { name: String, reason: String },

    #[error("invalid precision {0} bits")]
    InvalidPrecision(u32),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
