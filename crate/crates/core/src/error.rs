use thiserror::Error;

/// Failures surfaced by the library.
///
/// Variants split into mathematical failures (the input is well formed but the
/// requested object does not exist or could not be certified) and malformed
/// input. The CLI maps the first group to exit code 1 and the second to 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),
    #[error("operator is not Fredholm: {0}")]
    NotFredholm(String),
    #[error("index did not stabilize: {0}")]
    Unstable(String),
    #[error("reconstruction mismatch: {0}")]
    ReconstructionMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not a member: {0}")]
    NotMember(String),
    #[error("period {period} does not divide the ambient supernatural number {s}")]
    PeriodMismatch { period: u64, s: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("arithmetic overflow")]
    Overflow,
}

impl Error {
    /// `true` for errors caused by malformed input rather than mathematics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::PeriodMismatch { .. } | Error::Overflow
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
