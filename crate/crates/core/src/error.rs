use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p must be an odd prime (got {0})")]
    InvalidPrime(u64),
    #[error("s must be a positive integer")]
    InvalidPrecision,
    #[error("r = {0}/{1} must be a ratio of coprime positive integers")]
    InvalidExponent(u64, u64),
    #[error("r = {r_num}/{r_den} must exceed 1/(p-1) = 1/{}", p - 1)]
    ExponentTooSmall { p: u64, r_num: u64, r_den: u64 },
    #[error("modulus {p}^{s} exceeds the supported bound 2^62")]
    ModulusTooLarge { p: u64, s: u32 },
    #[error("{value} is not a unit modulo {p}")]
    NotAUnit { value: i128, p: u64 },
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("no value assigned to variable {0}")]
    MissingVariable(String),
    #[error("{0}")]
    OutOfRange(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("certificate family is {found}, expected {expected}")]
    WrongFamily { expected: String, found: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("malformed certificate: {0}")]
    Format(String),
}
