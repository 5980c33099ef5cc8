use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{function} is undefined here: smallest eigenvalue {lambda_min:e}")]
    Domain { function: &'static str, lambda_min: f64 },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:e})")]
    NotHpd { lambda_min: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("size guard: {0}")]
    TooLarge(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the request itself.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NotHpd { .. }
                | Error::NoConvergence(_)
        )
    }
}
