//! Identification pipelines: quasi-static composition, stoichiometry limits
//! and macro quantities, aging correlations and the stepwise transport
//! identification.

mod aging;
mod macro_chars;
mod objective;
mod quasi_static;
mod sso;

pub use aging::{apply_aging, fit_aging, AgingCoefficients, AgingEffect, AgingFit, AgingObservation};
pub use macro_chars::{derive_macro, soc_of_stoich, solve_stoich_limits, MacroCharacteristics, StoichLimits, OCV_POINTS};
pub use objective::{objective_value, segment_sse, ObjectiveMode};
pub use quasi_static::{identify_quasi_static, static_residual, StaticIdConfig, StaticIdentified, StaticTargets};
pub use sso::{
    build_sso_schedule, segment_objective, sso_identify, IdentificationResult, ParamEstimate, SsoConfig, SsoFailure,
    SsoSchedule, SsoStep, StepKind, StepRecord,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::optimize::OptimizeError;
use crate::profiles::ProfileError;
use crate::sensitivity::SensitivityError;

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error("traces are misaligned: {0}")]
    Alignment(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
}
