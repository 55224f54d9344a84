//! Cell models: open-circuit potential curves, parameter records, the
//! quasi-static stoichiometry model and the single-particle model with
//! electrolyte dynamics.

mod ocp;
mod params;
mod spme;
pub(crate) mod static_model;
mod trace;

pub use ocp::OcpCurve;
pub use params::{
    CellGeometry, CellParameters, CompositionParams, ElectrolyteFit, MaterialConstants,
    StoichPair, TransportParams,
};
pub use spme::{dynamic_step, init_state, init_state_on, CellState, Discretization, SpmeSolver, MAX_STEP};
pub use static_model::{static_step, static_voltages};
pub use trace::{simulate, simulate_prefix, simulate_with, VoltageTrace};

use thiserror::Error;

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96485.33212;
/// Molar gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314462618;

/// Which electrode an error or quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Electrode {
    Negative,
    Positive,
}

impl std::fmt::Display for Electrode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Electrode::Negative => f.write_str("negative"),
            Electrode::Positive => f.write_str("positive"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("stoichiometry {0} outside the OCP domain [0, 1]")]
    Domain(f64),
    #[error("invalid OCP table: {0}")]
    InvalidCurve(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{electrode} electrode depleted: stoichiometry reached {stoich}")]
    Depletion { electrode: Electrode, stoich: f64 },
    #[error("{electrode} particle surface saturated: surface stoichiometry {surface_stoich}")]
    Saturation { electrode: Electrode, surface_stoich: f64 },
    #[error("electrolyte concentration went negative ({min_conc} mol/m3) with dt = {dt} s; reduce the step")]
    Instability { dt: f64, min_conc: f64 },
    #[error("time step {dt} s exceeds the stable maximum {max} s")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("state shape does not match the discretization: {0}")]
    StateShape(String),
    #[error("no stoichiometry pair reaches {target} V (reachable {low}..{high} V)")]
    OcvOutOfRange { target: f64, low: f64, high: f64 },
    #[error("at t = {time} s: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<ModelError>,
    },
}

impl ModelError {
    /// Strips any `AtTime` wrappers.
    pub fn root(&self) -> &ModelError {
        match self {
            ModelError::AtTime { source, .. } => source.root(),
            other => other,
        }
    }
}
