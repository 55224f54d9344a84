//! Variance-based (Sobol total-effect) sensitivity analysis.

mod estimator;
mod matrix;
mod sobol;
mod space;

pub use estimator::{sample_matrices, total_effect, total_effect_multi, MultiEffect, SampleMatrices};
pub use matrix::{assign, build_sensitivity_matrix, Assignment, SensitivityMatrix};
pub use sobol::SobolSequence;
pub use space::{ParamSpace, TransportParam};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error("Sobol dimension {requested} unsupported (1..={max})")]
    Dimension { requested: usize, max: usize },
    #[error("invalid parameter space: {0}")]
    Space(String),
    #[error("sample size must be positive")]
    EmptySample,
    #[error("objective {output} has zero variance over the sample; total effects undefined")]
    Degenerate { output: usize },
    #[error("{failed} of {total} evaluations failed (more than 1%); estimate unreliable")]
    Unreliable { failed: usize, total: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}
