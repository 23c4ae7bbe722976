use thiserror::Error;

/// Errors surfaced by the numerical routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A grid or raster is too coarse for the requested computation.
    #[error("resolution error: {what} is {got:e}, must be at most {limit:e}")]
    Resolution {
        what: &'static str,
        got: f64,
        limit: f64,
    },

    /// A quadrature, factorization or solve did not reach its tolerance.
    #[error("numerical error in {context}: {detail}")]
    Numerical {
        context: &'static str,
        detail: String,
    },

    /// The operation is not defined for this model or scheme.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }

    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Resolution { .. } | Error::Unsupported(_) => 2,
            Error::Numerical { .. } => 3,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
