use thiserror::Error;

/// Failure modes shared by every operation in the crate.
///
/// Variants fall into three classes, exposed through [`Error::class`]: caller
/// mistakes (bad input, violated hypotheses), precision exhaustion, and
/// certificate failures that indicate a bug rather than bad input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("continued-fraction generator cannot produce quotient {index}: {reason}")]
    Unrepresentable { index: usize, reason: String },

    #[error("inconclusive after refining to the precision cap of {cap} bits")]
    Inconclusive { cap: u64 },

    #[error("search range of {len} candidates exceeds the enumeration budget of {budget} and structured search is disabled")]
    RangeTooLarge { len: String, budget: u64 },

    #[error("neither case of the disjunction could be certified")]
    NeitherCaseCertified,

    #[error("rate condition violated at n = {n}: -log(eps)/log(Q) = {ratio} exceeds {bound}")]
    RateViolation {
        n: u64,
        ratio: String,
        bound: String,
    },

    #[error("case (i) occurred for {count} of {total} indices in the upper half of the range")]
    CaseIPersists { count: usize, total: usize },

    #[error("residual u*xi - v vanishes at index {index}")]
    ZeroResidual { index: u64 },

    #[error("u*xi is a half-integer at index {index}; nearest integer is ambiguous")]
    HalfInteger { index: u64 },

    #[error("linear form value vanishes at index {index}")]
    ZeroFormValue { index: u64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("i/o: {0}")]
    Io(String),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Precondition,
    Precision,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Inconclusive { .. } | Error::Unrepresentable { .. } => ErrorClass::Precision,
            Error::NeitherCaseCertified | Error::Certificate(_) => ErrorClass::Internal,
            _ => ErrorClass::Precondition,
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
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

pub type Result<T> = std::result::Result<T, Error>;
