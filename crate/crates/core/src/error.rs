use std::path::PathBuf;

use thiserror::Error;

use crate::allocation::AllocationError;
use crate::dimensioning::DimensioningError;
use crate::lp::LpError;
use crate::qos::QosError;
use crate::scenario::ScenarioError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Qos(#[from] QosError),
    #[error(transparent)]
    Dimensioning(#[from] DimensioningError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
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
    #[error("json serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("plan verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from user input (config, profile files,
    /// arguments) rather than from a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Scenario(_) | Error::Io { .. } | Error::Csv { .. } | Error::InvalidArgument(_)
        )
    }
}
