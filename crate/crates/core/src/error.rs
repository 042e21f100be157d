use std::path::PathBuf;

use thiserror::Error;

/// Invalid scenario, region, or experiment parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("cannot draw {needed} distinct subcarriers from a set of {available}")]
    NotEnoughSubcarriers { needed: usize, available: usize },
    #[error("region is empty after clipping to the observation window")]
    EmptyRegion,
    #[error("desired regions cover the whole observation window; the wiretap set is empty")]
    EmptyWiretap,
    #[error("at least one user is required")]
    NoUsers,
}

impl ConfigError {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("problem has no ratio terms")]
    Empty,
    #[error("matrix dimensions disagree: expected {expected}x{expected}, found {found_rows}x{found_cols}")]
    Dimension {
        expected: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("denominator {index} is not Hermitian positive definite")]
    NotPositiveDefinite { index: usize },
    #[error("numerator {index} is not Hermitian positive semidefinite")]
    NotPositiveSemidefinite { index: usize },
    #[error("solver did not converge within {iterations} outer iterations")]
    NoConvergence { iterations: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
