use serde::{Deserialize, Serialize};

use super::{sample_matrices, total_effect_multi, ParamSpace, SensitivityError, TransportParam};
use crate::identify::{segment_sse, ObjectiveMode};
use crate::model::{simulate_prefix, CellParameters, CellState};
use crate::profiles::{PulseSet, Regime, SegmentId};

/// Total-effect indices of each parameter on each segment objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMatrix {
    pub params: Vec<TransportParam>,
    /// `s[k][j]`: parameter `k`, segment `j + 1`. Raw estimates; small
    /// negative values are kept.
    pub s: Vec<Vec<f64>>,
    pub pulses: usize,
    pub m: usize,
    pub evaluations: usize,
    pub failed: usize,
}

impl SensitivityMatrix {
    pub fn get(&self, k: usize, seg: SegmentId) -> f64 {
        self.s[k][seg.0 - 1]
    }

    /// Mean index of parameter `k` over the segments of one regime.
    pub fn regime_mean(&self, k: usize, regime: Regime) -> f64 {
        let vals: Vec<f64> = (0..self.pulses)
            .map(|p| self.get(k, SegmentId::new(p, regime, self.pulses)).max(0.0))
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    pub fn index_of(&self, p: TransportParam) -> Option<usize> {
        self.params.iter().position(|&q| q == p)
    }

    /// Comma-separated matrix with a header of segment labels.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("parameter");
        for j in 1..=self.s.first().map_or(0, |r| r.len()) {
            s.push_str(&format!(",zeta{j}"));
        }
        s.push('\n');
        for (p, row) in self.params.iter().zip(&self.s) {
            s.push_str(p.name());
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Samples the transport parameters over `space`, simulates every pulse
/// for each sample and estimates the total effect of each parameter on
/// every segment objective.
///
/// One simulation per pulse and sample feeds all of that pulse's segment
/// objectives. Simulation failures are excluded pairwise.
pub fn build_sensitivity_matrix(
    pulse_set: &PulseSet,
    space: &ParamSpace,
    known: &CellParameters,
    init: &CellState,
    m: usize,
) -> Result<SensitivityMatrix, SensitivityError> {
    let mats = sample_matrices(space, m)?;
    let pulses = pulse_set.pulses.len();
    let n_seg = 3 * pulses;
    let eval = |x: &[f64]| -> Option<Vec<f64>> {
        let mut params = known.clone();
        params.transport = space.apply(&known.transport, x);
        let mut out = vec![0.0; n_seg];
        for (p, st) in pulse_set.pulses.iter().enumerate() {
            let v = simulate_prefix(&st.profile, &params, init, st.profile.len()).ok()?;
            for regime in Regime::ALL {
                let mode = ObjectiveMode::for_regime(regime);
                let seg = SegmentId::new(p, regime, pulses);
                out[seg.0 - 1] = segment_sse(&st.trace.voltage, &v, &st.cuts, mode);
            }
        }
        Some(out)
    };
    let r = total_effect_multi(eval, &mats, n_seg)?;
    Ok(SensitivityMatrix {
        params: space.params.clone(),
        s: r.indices,
        pulses,
        m,
        evaluations: r.evaluations,
        failed: r.failed,
    })
}

/// Partition of the parameters by the regime they are identified in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Identified from the instantaneous segments.
    pub instantaneous: Vec<TransportParam>,
    /// Identified from the excitation and rest segments.
    pub transport: Vec<TransportParam>,
    /// Too weakly observable; fixed at empirical values.
    pub dropped: Vec<TransportParam>,
}

/// Drops parameters whose largest index stays below `threshold` and assigns
/// the rest to the regime where their mean index is largest.
pub fn assign(sens: &SensitivityMatrix, threshold: f64) -> Assignment {
    let mut a = Assignment {
        instantaneous: Vec::new(),
        transport: Vec::new(),
        dropped: Vec::new(),
    };
    for (k, &p) in sens.params.iter().enumerate() {
        let max = sens.s[k].iter().fold(0.0f64, |acc, &v| acc.max(v.max(0.0)));
        if max < threshold {
            a.dropped.push(p);
            continue;
        }
        let mi = sens.regime_mean(k, Regime::Instantaneous);
        let me = sens.regime_mean(k, Regime::Excitation);
        let mr = sens.regime_mean(k, Regime::Rest);
        if mi >= me && mi >= mr {
            a.instantaneous.push(p);
        } else {
            a.transport.push(p);
        }
    }
    a
}
