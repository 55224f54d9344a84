use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{segment_sse, IdentifyError, ObjectiveMode};
use crate::model::{simulate_prefix, CellParameters, CellState};
use crate::optimize::{minimize, BoundedProblem, SolverConfig, SolverKind};
use crate::profiles::{PulseSet, Regime, SegmentId};
use crate::sensitivity::{Assignment, ParamSpace, SensitivityMatrix, TransportParam};

/// Objective (V²) charged when a candidate cannot be simulated.
const FAILED_OBJECTIVE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Preliminary,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsoStep {
    pub kind: StepKind,
    pub params: Vec<TransportParam>,
    pub segment: SegmentId,
    pub mode: ObjectiveMode,
    pub solver: SolverKind,
}

/// Ordered identification steps derived from a sensitivity matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsoSchedule {
    pub pulses: usize,
    pub steps: Vec<SsoStep>,
}

impl SsoSchedule {
    /// Parameters estimated by the schedule, in first-appearance order.
    pub fn params(&self) -> Vec<TransportParam> {
        let mut out = Vec::new();
        for s in &self.steps {
            for p in &s.params {
                if !out.contains(p) {
                    out.push(*p);
                }
            }
        }
        out
    }

    /// Checks the ordering rules: each parameter has exactly one
    /// preliminary and one joint step, the preliminary first.
    pub fn validate(&self) -> Result<(), IdentifyError> {
        for p in self.params() {
            let prelim: Vec<usize> = self.positions(p, StepKind::Preliminary);
            let joint: Vec<usize> = self.positions(p, StepKind::Joint);
            if prelim.len() != 1 || joint.len() != 1 {
                return Err(IdentifyError::Schedule(format!(
                    "{p} has {} preliminary and {} joint steps",
                    prelim.len(),
                    joint.len()
                )));
            }
            if prelim[0] > joint[0] {
                return Err(IdentifyError::Schedule(format!("{p} is refined before its first estimate")));
            }
        }
        for s in &self.steps {
            if s.kind == StepKind::Preliminary && s.params.len() != 1 {
                return Err(IdentifyError::Schedule("preliminary steps take one parameter".into()));
            }
            if s.segment.0 == 0 || s.segment.0 > 3 * self.pulses {
                return Err(IdentifyError::Schedule(format!("no segment {}", s.segment)));
            }
        }
        Ok(())
    }

    fn positions(&self, p: TransportParam, kind: StepKind) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == kind && s.params.contains(&p))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Steps for one parameter set over its candidate segments.
fn schedule_set(
    sens: &SensitivityMatrix,
    set: &[TransportParam],
    candidates: &[SegmentId],
    steps: &mut Vec<SsoStep>,
) -> Result<(), IdentifyError> {
    if set.is_empty() {
        return Ok(());
    }
    let mut rows = Vec::with_capacity(set.len());
    for &p in set {
        let k = sens
            .index_of(p)
            .ok_or_else(|| IdentifyError::Schedule(format!("{p} missing from the sensitivity matrix")))?;
        rows.push((p, k));
    }
    let mean = |k: usize| candidates.iter().map(|&s| sens.get(k, s)).sum::<f64>() / candidates.len() as f64;
    rows.sort_by(|a, b| mean(b.1).total_cmp(&mean(a.1)));
    let mode_of = |s: SegmentId| ObjectiveMode::for_regime(s.regime(sens.pulses));
    for &(p, k) in &rows {
        let mut best = candidates[0];
        for &s in candidates {
            if sens.get(k, s) > sens.get(k, best) {
                best = s;
            }
        }
        steps.push(SsoStep {
            kind: StepKind::Preliminary,
            params: vec![p],
            segment: best,
            mode: mode_of(best),
            solver: SolverKind::Local,
        });
    }
    let spread = |s: SegmentId| {
        let vals: Vec<f64> = rows.iter().map(|&(_, k)| sens.get(k, s)).collect();
        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let mut joint = candidates[0];
    for &s in candidates {
        if spread(s) < spread(joint) {
            joint = s;
        }
    }
    steps.push(SsoStep {
        kind: StepKind::Joint,
        params: rows.iter().map(|&(p, _)| p).collect(),
        segment: joint,
        mode: mode_of(joint),
        solver: SolverKind::Pso,
    });
    Ok(())
}

/// Builds the stepwise schedule: the instantaneous set first, estimated on
/// the instantaneous segments, then the transport set on the excitation
/// and rest segments.
///
/// Within a set, parameters are taken in order of decreasing mean
/// sensitivity. Each gets a preliminary step on the segment where it is
/// most sensitive; the set is then refined jointly on the segment where the
/// members' sensitivities are closest together.
pub fn build_sso_schedule(sens: &SensitivityMatrix, assignment: &Assignment) -> Result<SsoSchedule, IdentifyError> {
    if assignment.instantaneous.is_empty() && assignment.transport.is_empty() {
        return Err(IdentifyError::Schedule("every parameter was dropped".into()));
    }
    let n = sens.pulses;
    let inst: Vec<SegmentId> = (0..n).map(|p| SegmentId::new(p, Regime::Instantaneous, n)).collect();
    let trans: Vec<SegmentId> = [Regime::Excitation, Regime::Rest]
        .iter()
        .flat_map(|&r| (0..n).map(move |p| SegmentId::new(p, r, n)))
        .collect();
    let mut steps = Vec::new();
    schedule_set(sens, &assignment.instantaneous, &inst, &mut steps)?;
    schedule_set(sens, &assignment.transport, &trans, &mut steps)?;
    let schedule = SsoSchedule { pulses: n, steps };
    schedule.validate()?;
    Ok(schedule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsoConfig {
    pub preliminary_solver: SolverConfig,
    pub joint_solver: SolverConfig,
    /// Joint bounds are `[1 - f, 1 + f]` times the preliminary estimates.
    pub joint_bound_fraction: f64,
    /// Preliminary estimates are averaged over this many random draws of
    /// the not-yet-estimated parameters.
    pub random_draws: usize,
    pub seed: u64,
    /// Factor applied to the V² objective before it reaches a solver.
    pub objective_scale: f64,
    /// Values for parameters outside the schedule; defaults to the middle
    /// of their range.
    #[serde(default)]
    pub fixed: Vec<(TransportParam, f64)>,
}

impl Default for SsoConfig {
    fn default() -> Self {
        SsoConfig {
            preliminary_solver: SolverConfig::local(),
            joint_solver: SolverConfig {
                max_iterations: 200,
                tolerance: 1e-6,
                ..SolverConfig::pso()
            },
            joint_bound_fraction: 0.05,
            random_draws: 1,
            seed: 42,
            objective_scale: 1e6,
            fixed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub step: SsoStep,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Values the other scheduled parameters held during the step.
    pub context: Vec<(TransportParam, f64)>,
    pub values: Vec<f64>,
    /// Segment objective at the result, V².
    pub objective: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Best scaled objective after each solver iteration (last draw).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub param: TransportParam,
    pub value: f64,
    /// False for parameters fixed outside the schedule.
    pub identified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub estimates: Vec<ParamEstimate>,
    pub schedule: SsoSchedule,
    pub steps: Vec<StepRecord>,
    /// Objective of every segment with the final values, V².
    pub segment_objectives: Vec<f64>,
    pub evaluations: usize,
    pub seed: u64,
    /// Wall-clock seconds per step. Not part of the reproducible record.
    #[serde(skip)]
    pub step_seconds: Vec<f64>,
}

impl IdentificationResult {
    pub fn value(&self, p: TransportParam) -> Option<f64> {
        self.estimates.iter().find(|e| e.param == p).map(|e| e.value)
    }

    /// Transport parameters of `base` with every estimate written in.
    pub fn apply(&self, base: &crate::model::TransportParams) -> crate::model::TransportParams {
        let mut t = base.clone();
        for e in &self.estimates {
            e.param.set(&mut t, e.value);
        }
        t
    }
}

/// A failed schedule with everything completed before the failure.
#[derive(Debug)]
pub struct SsoFailure {
    pub step: usize,
    pub error: IdentifyError,
    pub partial: IdentificationResult,
}

impl std::fmt::Display for SsoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step {} failed: {}", self.step + 1, self.error)
    }
}

impl std::error::Error for SsoFailure {}

/// Segment objective for one pulse with the given transport values.
pub fn segment_objective(
    pulse_set: &PulseSet,
    init: &CellState,
    base: &CellParameters,
    segment: SegmentId,
    mode: ObjectiveMode,
) -> Result<f64, IdentifyError> {
    let n = pulse_set.pulses.len();
    let st = &pulse_set.pulses[segment.pulse(n)];
    let regime = segment.regime(n);
    let v = simulate_prefix(&st.profile, base, init, st.cuts.last_index(regime) + 1)?;
    Ok(segment_sse(&st.trace.voltage, &v, &st.cuts, mode))
}

/// Runs the schedule against measured pulse responses.
///
/// Parameters of `space` that the schedule does not estimate are fixed
/// (see `SsoConfig::fixed`). A preliminary step searches the full range of
/// its parameter while the other scheduled parameters take their latest
/// estimate or, before they have one, a seeded random draw. A joint step
/// searches a narrow box around the preliminary estimates, cut to the
/// range of `space`. Parameters of
/// earlier sets stay fixed in later steps.
pub fn sso_identify(
    pulse_set: &PulseSet,
    init: &CellState,
    schedule: &SsoSchedule,
    space: &ParamSpace,
    knowns: &CellParameters,
    cfg: &SsoConfig,
) -> Result<IdentificationResult, SsoFailure> {
    let scheduled = schedule.params();
    let mut current: Vec<Option<f64>> = vec![None; space.dim()];
    let mut estimates_fixed = Vec::new();
    for (k, p) in space.params.iter().enumerate() {
        if !scheduled.contains(p) {
            let v = cfg
                .fixed
                .iter()
                .find(|(q, _)| q == p)
                .map_or_else(|| space.midpoint(k), |&(_, v)| v);
            current[k] = Some(v);
            estimates_fixed.push(k);
        }
    }
    let mut result = IdentificationResult {
        estimates: Vec::new(),
        schedule: schedule.clone(),
        steps: Vec::new(),
        segment_objectives: Vec::new(),
        evaluations: 0,
        seed: cfg.seed,
        step_seconds: Vec::new(),
    };
    let fail = |step: usize, error: IdentifyError, partial: &IdentificationResult, current: &[Option<f64>]| {
        let mut partial = partial.clone();
        partial.estimates = estimates_from(space, current, &estimates_fixed);
        SsoFailure { step, error, partial }
    };
    if let Err(e) = schedule.validate() {
        return Err(fail(0, e, &result, &current));
    }
    let mut index_of = Vec::new();
    for p in &scheduled {
        match space.params.iter().position(|q| q == p) {
            Some(k) => index_of.push((*p, k)),
            None => {
                let e = IdentifyError::Schedule(format!("{p} is not in the parameter space"));
                return Err(fail(0, e, &result, &current));
            }
        }
    }
    let k_of = |p: TransportParam| index_of.iter().find(|(q, _)| *q == p).map(|(_, k)| *k).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut preliminary: Vec<Option<f64>> = vec![None; space.dim()];
    for (si, step) in schedule.steps.iter().enumerate() {
        let started = Instant::now();
        let ks: Vec<usize> = step.params.iter().map(|&p| k_of(p)).collect();
        let (lower, upper): (Vec<f64>, Vec<f64>) = match step.kind {
            StepKind::Preliminary => (ks.iter().map(|&k| space.lower[k]).collect(), ks.iter().map(|&k| space.upper[k]).collect()),
            StepKind::Joint => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for &k in &ks {
                    let Some(v) = preliminary[k] else {
                        let e = IdentifyError::Schedule(format!("{} has no preliminary estimate", space.params[k]));
                        return Err(fail(si, e, &result, &current));
                    };
                    lo.push((v * (1.0 - cfg.joint_bound_fraction)).max(space.lower[k]));
                    hi.push((v * (1.0 + cfg.joint_bound_fraction)).min(space.upper[k]));
                }
                (lo, hi)
            }
        };
        let draws = if step.kind == StepKind::Preliminary { cfg.random_draws.max(1) } else { 1 };
        let mut solver = match step.kind {
            StepKind::Preliminary => cfg.preliminary_solver.clone(),
            StepKind::Joint => cfg.joint_solver.clone(),
        };
        solver.kind = step.solver;
        let mut sum = vec![0.0; ks.len()];
        let mut evaluations = 0;
        let mut iterations = 0;
        let mut context = Vec::new();
        let mut history = Vec::new();
        for d in 0..draws {
            // Everything but the step's own parameters.
            let mut values: Vec<f64> = vec![0.0; space.dim()];
            context.clear();
            for k in 0..space.dim() {
                values[k] = match current[k] {
                    Some(v) => v,
                    None => space.lower[k] + rng.random::<f64>() * (space.upper[k] - space.lower[k]),
                };
                if !ks.contains(&k) && scheduled.contains(&space.params[k]) {
                    context.push((space.params[k], values[k]));
                }
            }
            let scale = cfg.objective_scale;
            let objective = |x: &[f64]| -> f64 {
                let mut v = values.clone();
                for (i, &k) in ks.iter().enumerate() {
                    v[k] = x[i];
                }
                let mut params = knowns.clone();
                params.transport = space.apply(&knowns.transport, &v);
                match segment_objective(pulse_set, init, &params, step.segment, step.mode) {
                    Ok(f) if f.is_finite() => f * scale,
                    _ => FAILED_OBJECTIVE * scale,
                }
            };
            let problem = match BoundedProblem::new(lower.clone(), upper.clone(), objective) {
                Ok(p) => p,
                Err(e) => return Err(fail(si, e.into(), &result, &current)),
            };
            let start: Vec<f64> = match step.kind {
                StepKind::Preliminary => ks.iter().map(|&k| space.midpoint(k)).collect(),
                StepKind::Joint => ks.iter().map(|&k| preliminary[k].unwrap()).collect(),
            };
            solver.seed = cfg.seed.wrapping_add(1000 * (si as u64 + 1) + d as u64);
            let out = match minimize(&problem, &solver, Some(&start)) {
                Ok(o) => o,
                Err(e) => return Err(fail(si, e.into(), &result, &current)),
            };
            for (s, v) in sum.iter_mut().zip(&out.best_point) {
                *s += v;
            }
            evaluations += out.evaluations;
            iterations += out.iterations;
            history = out.history.iter().map(|h| h.best_value).collect();
        }
        let estimate: Vec<f64> = sum.iter().map(|s| s / draws as f64).collect();
        for (i, &k) in ks.iter().enumerate() {
            current[k] = Some(estimate[i]);
            if step.kind == StepKind::Preliminary {
                preliminary[k] = Some(estimate[i]);
            }
        }
        // Objective at the recorded estimate, with the recorded context.
        let mut v: Vec<f64> = current.iter().map(|c| c.unwrap_or(f64::NAN)).collect();
        for (p, val) in &context {
            v[k_of(*p)] = *val;
        }
        for k in 0..v.len() {
            if v[k].is_nan() {
                v[k] = space.midpoint(k);
            }
        }
        let mut params = knowns.clone();
        params.transport = space.apply(&knowns.transport, &v);
        let objective = segment_objective(pulse_set, init, &params, step.segment, step.mode).unwrap_or(FAILED_OBJECTIVE);
        result.evaluations += evaluations;
        result.steps.push(StepRecord {
            index: si + 1,
            step: step.clone(),
            lower,
            upper,
            context,
            values: estimate,
            objective,
            evaluations,
            iterations,
            history,
        });
        result.step_seconds.push(started.elapsed().as_secs_f64());
    }
    result.estimates = estimates_from(space, &current, &estimates_fixed);
    let mut params = knowns.clone();
    params.transport = result.apply(&knowns.transport);
    let n = pulse_set.pulses.len();
    for seg in pulse_set.segments() {
        let mode = ObjectiveMode::for_regime(seg.regime(n));
        match segment_objective(pulse_set, init, &params, seg, mode) {
            Ok(f) => result.segment_objectives.push(f),
            Err(e) => return Err(fail(schedule.steps.len(), e, &result, &current)),
        }
    }
    Ok(result)
}

fn estimates_from(space: &ParamSpace, current: &[Option<f64>], fixed: &[usize]) -> Vec<ParamEstimate> {
    space
        .params
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| {
            current[k].map(|value| ParamEstimate {
                param: p,
                value,
                identified: !fixed.contains(&k),
            })
        })
        .collect()
}
