use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported lattice family {family} in dimension {n}")]
    Unsupported { family: String, n: usize },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular or nearly so (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("{what} supports n <= {max}, got n = {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("boundary is not a function here: hyperplane {index} has first normal component {value:e}")]
    NotAFunction { index: usize, value: f64 },
    #[error("folding did not converge after {passes} passes")]
    FoldDiverged { passes: usize },
    #[error("piece count mismatch: expected {expected}, got {got}")]
    CountMismatch { expected: u64, got: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Unsupported { .. }
                | Error::NotPositiveDefinite
                | Error::Singular { .. }
                | Error::DimensionMismatch { .. }
                | Error::TooLarge { .. }
                | Error::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
