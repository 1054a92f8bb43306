//! Operational surface: configuration, experiment dispatch, statistics and
//! transcript files.

pub mod config;
pub mod run;
pub mod stats;
pub mod transcript;

use std::path::Path;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::ots::OtsError;
use crate::params::ParamsError;
use crate::primitives::PrimitiveError;
use crate::qkd::{QkdError, WireError};
use crate::qsim::BitError;

pub use config::{Budget, Experiment, Overrides, RunConfig, SEED_ENV};
pub use run::{run_cli, toeplitz_worst_collision, Report, RunOutput};
pub use stats::{
    chi_square_statistic, chi_square_uniform, estimate_tv, tv_bound_one_sample, tv_bound_two_sample, DistTable,
    StatsError,
};
pub use transcript::{read_records, read_transcript, write_records, write_transcript};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Qkd(#[from] QkdError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Bits(#[from] BitError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<ParamsError> for HarnessError {
    fn from(e: ParamsError) -> Self {
        HarnessError::Config(e.0)
    }
}
