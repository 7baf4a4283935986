// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use faasim_core::catalog::CatalogError;
use faasim_core::placement::PlacementError;
use faasim_core::shuffleplan::ShuffleError;
use faasim_core::simcore::{BillingError, SimError};
use faasim_core::units::UnitError;
use faasim_core::workloads::{GraphError, TraceError, WorkloadParseError};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, values outside a model's domain.
    #[error("{0}")]
    Validation(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}

validation_from!(
    CatalogError,
    PlacementError,
    ShuffleError,
    BillingError,
    SimError,
    UnitError,
    GraphError,
    TraceError,
    WorkloadParseError
);

pub type CliResult<T> = Result<T, CliError>;
