use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("mu must be > 0")]
    NonPositiveMu,
    #[error("lambda must be >= 0")]
    NegativeLambda,
    #[error("delta must be >= 0")]
    NegativeDelta,
    #[error("threshold must be >= 0")]
    NegativeThreshold,
    #[error("{kind} fixes {param} to {fixed}; pass {fixed} or switch problem kind")]
    KindParamConflict {
        kind: &'static str,
        param: &'static str,
        fixed: &'static str,
    },
    #[error("max_iters must be >= 1")]
    ZeroIterations,
    #[error("iterates diverged to non-finite or huge values at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("active-set solver exceeded {0} outer iterations")]
    MaxOuterIterations(usize),
    #[error("library column {0} is entirely zero")]
    ZeroColumn(usize),
    #[error("library must have at least one band and one signature")]
    EmptyLibrary,
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("cannot define SNR for a zero-energy clean signal")]
    ZeroSignal,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("grid oracle supports n <= 3, got {0}")]
    GridTooLarge(usize),
    #[error("grid step must be in (0, 1e-3]")]
    BadGridStep,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
