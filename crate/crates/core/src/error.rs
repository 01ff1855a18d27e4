use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
    Budget,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("covariance table queried at t = {t}, outside its range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error(
        "circulant embedding failed for {model} on {n_points} points with step {step}: \
         clipped mass {clipped_mass:.3e} at circulant size {circulant_size}"
    )]
    Embedding {
        model: String,
        n_points: usize,
        step: f64,
        circulant_size: usize,
        clipped_mass: f64,
    },

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("no Pickands constant available for alpha = {alpha}; run the `pickands` subcommand first")]
    MissingPickands { alpha: f64 },

    #[error("Pickands ladder did not stabilise within relative tolerance {tolerance}: rates {rates:?}")]
    NonConvergence { rates: Vec<f64>, tolerance: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {error:.3e})")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    #[error("path of {points} grid points exceeds the memory budget of {budget} ({context})")]
    Budget {
        points: u64,
        budget: usize,
        context: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Regime(_) => {
                ErrorKind::Validation
            }
            Error::MissingPickands { .. } => ErrorKind::Validation,
            Error::OutOfRange { .. }
            | Error::Embedding { .. }
            | Error::NonConvergence { .. }
            | Error::Quadrature { .. } => ErrorKind::Numeric,
            Error::Budget { .. } => ErrorKind::Budget,
            Error::Io { .. } | Error::Csv { .. } => ErrorKind::Io,
        }
    }
}
