use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants fall into four classes which the command-line front end maps to
/// distinct exit codes; see [`Error::class`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("characteristic {0} is not an odd prime")]
    BadCharacteristic(u64),
    #[error("extension degree must be at least 1, got {0}")]
    BadDegree(usize),
    #[error("field order {p}^{e} exceeds 2^63")]
    FieldTooLarge { p: u64, e: usize },
    #[error("modulus is not irreducible over F_{0}")]
    ReducibleModulus(u64),
    #[error("label {label} is not an element of a field of order {order}")]
    BadLabel { label: u64, order: u64 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial is not squarefree: gcd(F, F') = {gcd}")]
    NotSquarefree { gcd: String },
    #[error("degree {0} is below 5, genus would be < 2")]
    DegreeTooSmall(usize),
    #[error("{0} is not irreducible")]
    NotIrreducible(String),
    #[error("gcd(n, d) = gcd({n}, {d}) != 1: the strictly semistable locus is only handled for (2, 0)")]
    NotCoprime { n: usize, d: i64 },
    #[error("rank {0} is outside the supported range 1..=6")]
    RankOutOfRange(usize),
    #[error("composition must have at least two parts")]
    TrivialComposition,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Unsupported,
    Resource,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotCoprime { .. } | Error::RankOutOfRange(_) => ErrorClass::Unsupported,
            Error::Cap(_) | Error::FieldTooLarge { .. } => ErrorClass::Resource,
            Error::Invariant(_) => ErrorClass::Internal,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for building an invariant violation.
pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}
