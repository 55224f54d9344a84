use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DegradationStage, HarnessError};
use crate::identify::{solve_stoich_limits, StaticTargets};
use crate::model::{init_state, simulate, CellParameters, StoichPair, VoltageTrace};
use crate::profiles::{gen_pulse_set, gen_quasi_static, CurrentProfile, PulseConfig, QuasiStaticConfig};

/// Generator-side values a twin run is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinTruth {
    pub cycles: u32,
    pub params: CellParameters,
    /// Rest state at the start of the quasi-static test and the true
    /// active-material fractions.
    pub static_targets: StaticTargets,
    /// Rest state the pulses start from.
    pub pulse_start: StoichPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinData {
    pub truth: TwinTruth,
    pub quasi_static_profile: CurrentProfile,
    pub quasi_static: VoltageTrace,
    pub pulse_profiles: Vec<CurrentProfile>,
    pub pulses: Vec<VoltageTrace>,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Rest state at `soc` inside the voltage window, on the lithium line
/// through `start`.
pub fn pulse_start_state(
    params: &CellParameters,
    start: &StaticTargets,
    soc: f64,
    v_min: f64,
    v_max: f64,
) -> Result<StoichPair, HarnessError> {
    let lim = solve_stoich_limits(start, params, v_min, v_max)?;
    let neg = lim.stoich_neg_min + soc * (lim.stoich_neg_max - lim.stoich_neg_min);
    let pos = lim.stoich_pos_max - soc * (lim.stoich_pos_max - lim.stoich_pos_min);
    Ok(StoichPair { neg, pos })
}

/// Simulates the quasi-static test and the pulse set with the stage's true
/// parameters and adds seeded Gaussian noise of `sigma` volts to the
/// voltages. The quasi-static trace draws its noise first, then each pulse
/// in order.
#[allow(clippy::too_many_arguments)]
pub fn generate_twin(
    stage: &DegradationStage,
    base: &CellParameters,
    qs_cfg: &QuasiStaticConfig,
    pulse_cfg: &PulseConfig,
    v_window: (f64, f64),
    sigma: f64,
    seed: u64,
) -> Result<TwinData, HarnessError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(HarnessError::Parse {
            line: 0,
            reason: format!("noise sigma {sigma} must be non-negative"),
        });
    }
    let params = stage.params(base);
    let (qs_profile, qs_start) = gen_quasi_static(&params, qs_cfg)?;
    let static_targets = StaticTargets {
        stoich_neg_t0: qs_start.neg,
        stoich_pos_t0: qs_start.pos,
        eps_s_neg: params.composition.eps_s_neg,
        eps_s_pos: params.composition.eps_s_pos,
    };
    let mut qs = simulate(&qs_profile, &params, &init_state(&params, qs_start.neg, qs_start.pos)?)?;

    let pulse_start = pulse_start_state(&params, &static_targets, pulse_cfg.start_soc, v_window.0, v_window.1)?;
    let init = init_state(&params, pulse_start.neg, pulse_start.pos)?;
    let pulse_profiles = gen_pulse_set(pulse_cfg);
    let mut pulses = Vec::with_capacity(pulse_profiles.len());
    for prof in &pulse_profiles {
        pulses.push(simulate(prof, &params, &init)?);
    }
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).expect("finite sigma");
        for v in qs.voltage.iter_mut().chain(pulses.iter_mut().flat_map(|t| t.voltage.iter_mut())) {
            *v += noise.sample(&mut rng);
        }
    }
    Ok(TwinData {
        truth: TwinTruth {
            cycles: stage.cycles,
            params,
            static_targets,
            pulse_start,
        },
        quasi_static_profile: qs_profile,
        quasi_static: qs,
        pulse_profiles,
        pulses,
        noise_sigma: sigma,
        seed,
    })
}
