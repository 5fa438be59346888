use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e} below {threshold:.3e}")]
    NotPositive {
        min_eigenvalue: f64,
        threshold: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: last estimates {previous:.12e} and {last:.12e}")]
    Quadrature { previous: f64, last: f64 },

    #[error(
        "optimizer hit the iteration cap after {iterations} steps: objective {objective:.12e}, gradient norm {gradient_norm:.3e}"
    )]
    Optimizer {
        iterations: usize,
        objective: f64,
        gradient_norm: f64,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
