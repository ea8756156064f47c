use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model, scheme or configuration invariant does not hold.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved error estimate {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("cholesky factorization failed for coordinate {coordinate} after jitter {jitter:e}")]
    Cholesky { coordinate: usize, jitter: f64 },

    #[error("circulant embedding is not nonnegative for coordinate {coordinate} (min eigenvalue {min_eigenvalue:e})")]
    Circulant { coordinate: usize, min_eigenvalue: f64 },

    /// Statistic is zero (e.g. all-zero paths) so the power map is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("ln(theta_k * T) is not positive for coordinate {coordinate} (theta_k * T = {product})")]
    LogSingularity { coordinate: usize, product: f64 },

    #[error("root bracket could not be established: {0}")]
    Bracket(String),

    #[error("replication {replication}, N = {n_coords}: {source}")]
    Experiment {
        replication: usize,
        n_coords: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::Cholesky { .. }
            | Error::Circulant { .. }
            | Error::Degenerate(_)
            | Error::Bracket(_) => true,
            Error::Experiment { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
