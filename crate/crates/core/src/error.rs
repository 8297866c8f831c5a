use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("gap parameter must lie in (0, 1), got {0}")]
    InvalidGap(f64),
    #[error("filter vanishes inside the inner interval (min |r| = {0:e})")]
    DegenerateFilter(f64),
    #[error("filter has already been scaled")]
    AlreadyScaled,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("weight vector violates the breakpoint ordering: {0}")]
    OrderingViolation(String),
    #[error("unsupported interval count s = {0}")]
    UnsupportedIntervals(usize),
    #[error("shifted solve failed for pole {0}")]
    SingularShift(String),
    #[error("spectrum too small: need at least 20 eigenvalues, got {0}")]
    SpectrumTooSmall(usize),
    #[error("{0}")]
    InvalidProblem(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FilterError>;
