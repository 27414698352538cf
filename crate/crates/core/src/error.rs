use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside its domain (imaginary frequency,
    /// non-positive occupation, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation failure: {0}")]
    Truncation(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    /// The finite-difference sensitivity used by the phonon estimator vanished.
    #[error("degenerate sensitivity: {0}")]
    Degenerate(String),

    #[error("fit did not converge: {0}")]
    Convergence(String),

    #[error("rank-deficient jacobian: {0}")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Domain(_)
            | Error::NoSolution(_)
            | Error::Truncation(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::Degenerate(_) | Error::Convergence(_) | Error::RankDeficient(_) | Error::Numerical(_) => 3,
        }
    }
}
