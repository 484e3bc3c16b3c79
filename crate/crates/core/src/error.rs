use thiserror::Error;

use crate::plane::ProjLine;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{r} exceeds the configured maximum {max}")]
    FieldTooLarge { p: u32, r: u32, max: u64 },
    #[error("element code {code} out of range for q = {q}")]
    ElemOutOfRange { code: u64, q: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{divisor} does not divide {value}")]
    NotDivisor { divisor: u64, value: u64 },
    #[error("matrix has determinant {det}, expected 1")]
    NotSl2 { det: u32 },
    #[error("the origin lies on every line through the origin")]
    OriginHasNoLine,
    #[error("lines must be distinct (got {0:?} twice)")]
    SameLine(ProjLine),
    #[error("enumeration of {count} items exceeds the limit {limit}")]
    EnumerationLimit { count: u64, limit: u64 },
    #[error("point set has no points off the origin")]
    OnlyOrigin,
    #[error("no line class with multiplicity {0}")]
    MissingClass(usize),
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("pair line precondition failed: {0}")]
    PairLine(&'static str),
    #[error("invalid set spec {spec:?}: {reason}")]
    SetSpec { spec: String, reason: String },
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
