use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed law document: {0}")]
    Malformed(String),

    #[error("invariant violated ({equation}): {detail}")]
    Invariant {
        equation: &'static str,
        detail: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature grid on [{grid_lo}, {grid_hi}] does not match density support [{lo}, {hi}]")]
    GridMismatch {
        grid_lo: f64,
        grid_hi: f64,
        lo: f64,
        hi: f64,
    },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate law: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input rather than by a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Divergent(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
