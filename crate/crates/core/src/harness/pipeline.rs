use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    load_trace, relative_error, rmse, HarnessError, MeasuredPaths, ParamError, ProfileRmse, RunConfig, TwinData,
    TwinTruth,
};
use crate::identify::{
    apply_aging, build_sso_schedule, derive_macro, identify_quasi_static, solve_stoich_limits, sso_identify,
    AgingEffect, IdentificationResult, MacroCharacteristics, StaticIdentified, StaticTargets, StoichLimits,
};
use crate::model::{init_state, simulate, CellParameters, CellState, StoichPair, VoltageTrace};
use crate::optimize::{minimize, BoundedProblem, SolverConfig};
use crate::profiles::{find_stoich_for_ocv, segment_trace, CurrentProfile, PulseSet};
use crate::sensitivity::{assign, build_sensitivity_matrix, Assignment, ParamSpace, SensitivityMatrix, TransportParam};

/// Measurements for one pass of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StageInput {
    pub label: String,
    pub quasi_static_profile: CurrentProfile,
    pub quasi_static: VoltageTrace,
    pub pulse_profiles: Vec<CurrentProfile>,
    pub pulses: Vec<VoltageTrace>,
    pub truth: Option<TwinTruth>,
}

impl StageInput {
    pub fn from_twin(t: &TwinData) -> Self {
        StageInput {
            label: format!("stage_{}", t.truth.cycles),
            quasi_static_profile: t.quasi_static_profile.clone(),
            quasi_static: t.quasi_static.clone(),
            pulse_profiles: t.pulse_profiles.clone(),
            pulses: t.pulses.clone(),
            truth: Some(t.truth.clone()),
        }
    }

    /// Reads the traces; the current profiles are taken from their current
    /// columns.
    pub fn from_files(paths: &MeasuredPaths) -> Result<Self, HarnessError> {
        let quasi_static = load_trace(&paths.quasi_static)?;
        let quasi_static_profile = CurrentProfile::from_trace(&quasi_static, "quasi-static")?;
        let mut pulse_profiles = Vec::new();
        let mut pulses = Vec::new();
        for p in &paths.pulses {
            let t = load_trace(p)?;
            let label = p.file_stem().map_or("pulse".into(), |s| s.to_string_lossy().into_owned());
            pulse_profiles.push(CurrentProfile::from_trace(&t, &label)?);
            pulses.push(t);
        }
        Ok(StageInput {
            label: "measured".into(),
            quasi_static_profile,
            quasi_static,
            pulse_profiles,
            pulses,
            truth: None,
        })
    }
}

/// Composition implied by the quasi-static fit and the aging correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionEstimate {
    pub static_id: StaticIdentified,
    pub limits: StoichLimits,
    pub macro_chars: MacroCharacteristics,
    pub aging: AgingEffect,
    /// Known parameters for the pulse test.
    pub params: CellParameters,
}

/// Outcome of the single joint search used for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub params: Vec<TransportParam>,
    pub sso_evaluations: usize,
    /// Over all pulse samples, V.
    pub sso_rmse: f64,
    /// Evaluation cap given to the joint search.
    pub budget: usize,
    pub evaluations: usize,
    pub best_rmse: f64,
    pub best_point: Vec<f64>,
    /// First evaluation count at which the joint search came within 10% of
    /// the stepwise RMSE.
    pub evaluations_to_match: Option<usize>,
}

impl BaselineComparison {
    /// Stepwise evaluations over the joint search's evaluations at matched
    /// RMSE; below 1 when the stepwise scheme is cheaper. `None` when the
    /// joint search never matched within its budget.
    pub fn evaluation_ratio(&self) -> Option<f64> {
        self.evaluations_to_match.map(|e| self.sso_evaluations as f64 / e as f64)
    }
}

/// Results of one stage. Holds nothing time-dependent, so equal inputs
/// give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub label: String,
    pub cycles: Option<u32>,
    pub composition: CompositionEstimate,
    /// Capacity of the true stage, twin mode only.
    pub true_capacity_mah: Option<f64>,
    pub rest_voltage: f64,
    pub pulse_start: StoichPair,
    pub sensitivity: SensitivityMatrix,
    pub assignment: Assignment,
    pub identification: IdentificationResult,
    /// Twin mode only.
    pub static_errors: Vec<ParamError>,
    pub transport_errors: Vec<ParamError>,
    /// One row per pulse, with the identified parameters.
    pub profile_rmse: Vec<ProfileRmse>,
    pub overall_rmse: f64,
    /// Departures from the expected observability pattern.
    pub flags: Vec<String>,
    pub baseline: Option<BaselineComparison>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub quasi_static_s: f64,
    pub sensitivity_s: f64,
    pub sso_s: f64,
    pub sso_steps_s: Vec<f64>,
    pub baseline_s: f64,
    pub total_s: f64,
}

/// Quasi-static fit, stoichiometry window, capacity and aging update.
///
/// The fresh cell in `cfg.cell` provides the nominal search point and the
/// fresh values the aging changes are measured from.
pub fn estimate_composition(cfg: &RunConfig, input: &StageInput) -> Result<CompositionEstimate, HarnessError> {
    let cell = &cfg.cell;
    let prof = &cfg.profiles;
    let start = find_stoich_for_ocv(cell, prof.quasi_static.start_ocv)?;
    let nominal = StaticTargets {
        stoich_neg_t0: start.neg,
        stoich_pos_t0: start.pos,
        eps_s_neg: cell.composition.eps_s_neg,
        eps_s_pos: cell.composition.eps_s_pos,
    };
    let static_id = identify_quasi_static(
        &input.quasi_static,
        &input.quasi_static_profile,
        cell,
        &nominal,
        &cfg.solvers.quasi_static,
    )?;
    let targets = static_id.targets();
    let limits = solve_stoich_limits(&targets, cell, prof.v_min, prof.v_max)?;
    let macro_chars = derive_macro(&limits, &targets, cell, prof.v_min, prof.v_max);

    // A fit marginally above the fresh value means no measurable loss.
    let d_neg = (static_id.eps_s_neg - cell.composition.eps_s_neg).min(0.0);
    let d_pos = (static_id.eps_s_pos - cell.composition.eps_s_pos).min(0.0);
    let aging = apply_aging(&cfg.solvers.aging, d_neg, d_pos)?;
    let mut params = cell.clone();
    targets.apply(&mut params);
    params.inventory = targets.start();
    params.composition.eps_e_neg = cell.composition.eps_e_neg + aging.d_eps_e_neg;
    params.set_film_resistance(
        cell.composition.film_resistance_neg + aging.film_resistance_neg,
        cell.composition.film_resistance_pos + aging.film_resistance_pos,
    );
    params.validate()?;
    Ok(CompositionEstimate {
        static_id,
        limits,
        macro_chars,
        aging,
        params,
    })
}

/// Mean voltage of the rest samples ahead of each pulse.
pub fn pre_pulse_rest_voltage(profiles: &[CurrentProfile], traces: &[VoltageTrace]) -> Result<f64, HarnessError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, t) in profiles.iter().zip(traces) {
        for (i, v) in p.samples.iter().zip(&t.voltage) {
            if *i != 0.0 {
                break;
            }
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(HarnessError::Config("pulse traces have no leading rest samples".into()));
    }
    Ok(sum / n as f64)
}

pub fn build_pulse_set(cfg: &RunConfig, input: &StageInput) -> Result<PulseSet, HarnessError> {
    if input.pulse_profiles.len() != input.pulses.len() {
        return Err(HarnessError::Config("one trace per pulse profile expected".into()));
    }
    let pulses = input
        .pulse_profiles
        .iter()
        .zip(&input.pulses)
        .map(|(p, t)| segment_trace(p, t, cfg.profiles.pulses.inst_window))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PulseSet { pulses })
}

/// Voltage RMSE of each pulse simulated with `params`, plus the RMSE over
/// all samples.
pub fn pulse_fit(
    pulse_set: &PulseSet,
    params: &CellParameters,
    init: &CellState,
) -> Result<(Vec<ProfileRmse>, f64), HarnessError> {
    let mut rows = Vec::new();
    let mut sse = 0.0;
    let mut n = 0usize;
    for st in &pulse_set.pulses {
        let v = simulate(&st.profile, params, init)?;
        let e = rmse(&v.voltage, &st.trace.voltage);
        sse += e * e * v.len() as f64;
        n += v.len();
        rows.push(ProfileRmse {
            label: st.profile.label.clone(),
            rmse: e,
        });
    }
    Ok((rows, (sse / n.max(1) as f64).sqrt()))
}

/// Searches all of `identified` at once over their full ranges with a
/// whole-trace objective on every pulse, the other parameters held at
/// `fixed`. Stops after `budget` evaluations.
#[allow(clippy::too_many_arguments)]
pub fn joint_baseline(
    pulse_set: &PulseSet,
    init: &CellState,
    params: &CellParameters,
    identified: &[TransportParam],
    solver: &SolverConfig,
    budget: usize,
    sso_evaluations: usize,
    sso_rmse: f64,
) -> Result<BaselineComparison, HarnessError> {
    let space = ParamSpace::of(identified);
    let samples: usize = pulse_set.pulses.iter().map(|p| p.trace.len()).sum();
    let scale = 1e6;
    let objective = |x: &[f64]| -> f64 {
        let mut p = params.clone();
        p.transport = space.apply(&params.transport, x);
        let mut s = 0.0;
        for st in &pulse_set.pulses {
            match simulate(&st.profile, &p, init) {
                Ok(v) => s += v.voltage.iter().zip(&st.trace.voltage).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                Err(_) => return 1e3 * scale,
            }
        }
        s * scale
    };
    let problem = BoundedProblem::new(space.lower.clone(), space.upper.clone(), objective)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut cfg = solver.clone();
    cfg.max_evaluations = Some(budget.max(cfg.population));
    cfg.max_iterations = 1_000_000;
    cfg.tolerance = 0.0;
    let out = minimize(&problem, &cfg, None).map_err(|e| HarnessError::Config(e.to_string()))?;
    let to_rmse = |f: f64| (f / scale / samples as f64).sqrt();
    let evaluations_to_match = out
        .history
        .iter()
        .find(|h| to_rmse(h.best_value) <= 1.1 * sso_rmse)
        .map(|h| h.evaluations);
    Ok(BaselineComparison {
        params: identified.to_vec(),
        sso_evaluations,
        sso_rmse,
        budget,
        evaluations: out.evaluations,
        best_rmse: to_rmse(out.best_value),
        best_point: out.best_point,
        evaluations_to_match,
    })
}

fn observability_flags(sens: &SensitivityMatrix, a: &Assignment) -> Vec<String> {
    let mut flags = Vec::new();
    let max_of = |p: TransportParam| {
        sens.index_of(p)
            .map_or(0.0, |k| sens.s[k].iter().fold(0.0f64, |m, &v| m.max(v)))
    };
    for p in [
        TransportParam::SolidConductivityNeg,
        TransportParam::SolidConductivityPos,
        TransportParam::SolidDiffusivityNeg,
    ] {
        if sens.index_of(p).is_some() && !a.dropped.contains(&p) {
            flags.push(format!(
                "{p} kept (largest index {:.4}); expected to be dropped. For the negative particle \
                 this happens when the graphite OCP slope at the pulse state is steep enough for \
                 its diffusion to show in the voltage.",
                max_of(p)
            ));
        }
    }
    for p in [TransportParam::ContactResistance, TransportParam::IonicConductivity] {
        if sens.index_of(p).is_some() && !a.instantaneous.contains(&p) {
            flags.push(format!("{p} not assigned to the instantaneous set"));
        }
    }
    for p in [
        TransportParam::SolidDiffusivityPos,
        TransportParam::ElectrolyteDiffusivity,
        TransportParam::Transference,
    ] {
        if sens.index_of(p).is_some() && !a.transport.contains(&p) {
            flags.push(format!("{p} not assigned to the transport set"));
        }
    }
    flags
}

/// Runs the whole identification chain on one set of measurements.
pub fn run_stage(cfg: &RunConfig, input: &StageInput) -> Result<(StageReport, StageTiming), HarnessError> {
    let t_all = Instant::now();
    let mut timing = StageTiming::default();

    let t = Instant::now();
    let composition = estimate_composition(cfg, input)?;
    timing.quasi_static_s = t.elapsed().as_secs_f64();
    let params = &composition.params;

    let rest_voltage = pre_pulse_rest_voltage(&input.pulse_profiles, &input.pulses)?;
    let pulse_start = find_stoich_for_ocv(params, rest_voltage)?;
    let init = init_state(params, pulse_start.neg, pulse_start.pos)?;
    let pulse_set = build_pulse_set(cfg, input)?;

    let t = Instant::now();
    let space = &cfg.sensitivity.space;
    let sensitivity = build_sensitivity_matrix(&pulse_set, space, params, &init, cfg.sensitivity.m)
        .map_err(crate::identify::IdentifyError::from)?;
    timing.sensitivity_s = t.elapsed().as_secs_f64();
    let assignment = assign(&sensitivity, cfg.sensitivity.drop_threshold);
    let schedule = build_sso_schedule(&sensitivity, &assignment)?;

    let t = Instant::now();
    let identification =
        sso_identify(&pulse_set, &init, &schedule, space, params, &cfg.sso).map_err(|f| HarnessError::Sso {
            step: f.step + 1,
            error: f.error,
        })?;
    timing.sso_s = t.elapsed().as_secs_f64();
    timing.sso_steps_s = identification.step_seconds.clone();

    let mut fitted = params.clone();
    fitted.transport = identification.apply(&params.transport);
    let (profile_rmse, overall_rmse) = pulse_fit(&pulse_set, &fitted, &init)?;

    let baseline = if cfg.harness.baseline {
        let t = Instant::now();
        let identified: Vec<TransportParam> = schedule.params();
        // The joint search gets as many evaluations as would make the
        // stepwise scheme use 60% of its count.
        let budget = (identification.evaluations as f64 / 0.6).ceil() as usize;
        let mut base = params.clone();
        base.transport = identification.apply(&params.transport);
        let b = joint_baseline(
            &pulse_set,
            &init,
            &base,
            &identified,
            &cfg.sso.joint_solver,
            budget,
            identification.evaluations,
            overall_rmse,
        )?;
        timing.baseline_s = t.elapsed().as_secs_f64();
        Some(b)
    } else {
        None
    };

    let mut static_errors = Vec::new();
    let mut transport_errors = Vec::new();
    let mut true_capacity_mah = None;
    if let Some(truth) = &input.truth {
        let id = composition.static_id.targets().to_vec();
        let tr = truth.static_targets.to_vec();
        for (k, name) in StaticTargets::NAMES.iter().enumerate() {
            static_errors.push(ParamError::new(*name, id[k], tr[k]));
        }
        for e in identification.estimates.iter().filter(|e| e.identified) {
            transport_errors.push(ParamError::new(e.param.name(), e.value, e.param.get(&truth.params.transport)));
        }
        let lim = solve_stoich_limits(&truth.static_targets, &truth.params, cfg.profiles.v_min, cfg.profiles.v_max)?;
        true_capacity_mah = Some(
            derive_macro(&lim, &truth.static_targets, &truth.params, cfg.profiles.v_min, cfg.profiles.v_max)
                .capacity_mah,
        );
    }

    let flags = observability_flags(&sensitivity, &assignment);
    timing.total_s = t_all.elapsed().as_secs_f64();
    Ok((
        StageReport {
            label: input.label.clone(),
            cycles: input.truth.as_ref().map(|t| t.cycles),
            composition,
            true_capacity_mah,
            rest_voltage,
            pulse_start,
            sensitivity,
            assignment,
            identification,
            static_errors,
            transport_errors,
            profile_rmse,
            overall_rmse,
            flags,
            baseline,
        },
        timing,
    ))
}

impl StageReport {
    /// Largest relative error among the identified transport parameters.
    pub fn worst_transport_error(&self) -> Option<f64> {
        self.transport_errors.iter().map(|e| e.relative_error).reduce(f64::max)
    }

    pub fn capacity_error(&self) -> Option<f64> {
        self.true_capacity_mah
            .map(|t| relative_error(self.composition.macro_chars.capacity_mah, t))
    }
}

/// Twin data for one reference stage under `cfg`. The noise seed is the
/// run seed offset by the cycle count so stages draw different noise.
pub fn twin_for_stage(cfg: &RunConfig, cycles: u32) -> Result<TwinData, HarnessError> {
    let stage = super::DegradationStage::at(cycles)?;
    super::generate_twin(
        &stage,
        &cfg.cell,
        &cfg.profiles.quasi_static,
        &cfg.profiles.pulses,
        (cfg.profiles.v_min, cfg.profiles.v_max),
        cfg.harness.noise_sigma,
        cfg.harness.seed.wrapping_add(cycles as u64),
    )
}
