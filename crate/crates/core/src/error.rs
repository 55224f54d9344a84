use thiserror::Error;

use crate::harness::HarnessError;
use crate::identify::IdentifyError;
use crate::model::ModelError;
use crate::optimize::OptimizeError;
use crate::profiles::ProfileError;
use crate::sensitivity::SensitivityError;

/// Umbrella error for callers that drive several stages of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

pub type Result<T> = std::result::Result<T, Error>;
