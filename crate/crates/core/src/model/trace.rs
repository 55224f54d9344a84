use serde::{Deserialize, Serialize};

use super::{CellParameters, CellState, Discretization, ModelError, SpmeSolver, MAX_STEP};
use crate::profiles::CurrentProfile;

/// Sampled terminal response of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageTrace {
    /// s
    pub time: Vec<f64>,
    /// A, discharge positive
    pub current: Vec<f64>,
    /// V
    pub voltage: Vec<f64>,
}

impl VoltageTrace {
    pub fn len(&self) -> usize {
        self.voltage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty()
    }
}

/// Runs the dynamic model over `profile` on the default grid.
///
/// Each profile sample holds its current over the preceding interval; the
/// recorded voltage is the one at the end of that interval.
pub fn simulate(
    profile: &CurrentProfile,
    params: &CellParameters,
    init: &CellState,
) -> Result<VoltageTrace, ModelError> {
    simulate_with(profile, params, init, Discretization::default())
}

/// `simulate` on a custom grid.
pub fn simulate_with(
    profile: &CurrentProfile,
    params: &CellParameters,
    init: &CellState,
    disc: Discretization,
) -> Result<VoltageTrace, ModelError> {
    let mut state = init.clone();
    let voltage = run(profile, params, &mut state, disc, profile.len())?;
    Ok(VoltageTrace {
        time: profile.times(),
        current: profile.samples.clone(),
        voltage,
    })
}

/// Voltages of the first `samples` profile samples only.
pub fn simulate_prefix(
    profile: &CurrentProfile,
    params: &CellParameters,
    init: &CellState,
    samples: usize,
) -> Result<Vec<f64>, ModelError> {
    let mut state = init.clone();
    run(profile, params, &mut state, Discretization::default(), samples.min(profile.len()))
}

/// Runs the first `samples` samples, leaving the final state in `state`.
pub(crate) fn run(
    profile: &CurrentProfile,
    params: &CellParameters,
    state: &mut CellState,
    disc: Discretization,
    samples: usize,
) -> Result<Vec<f64>, ModelError> {
    if profile.is_empty() {
        return Err(ModelError::InvalidParameter {
            name: "profile",
            reason: "no samples".into(),
        });
    }
    let substeps = (profile.dt / MAX_STEP - 1e-9).ceil().max(1.0) as usize;
    let h = profile.dt / substeps as f64;
    let mut solver = SpmeSolver::new(params, disc, h)?;
    let mut out = Vec::with_capacity(samples);
    for (k, &i) in profile.samples[..samples].iter().enumerate() {
        let mut v = 0.0;
        for s in 0..substeps {
            v = solver.step(state, i).map_err(|e| ModelError::AtTime {
                time: k as f64 * profile.dt + (s + 1) as f64 * h,
                source: Box::new(e),
            })?;
        }
        out.push(v);
    }
    Ok(out)
}
