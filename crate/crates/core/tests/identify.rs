use cellident_core::harness::{generate_twin, DegradationStage, TwinData};
use cellident_core::identify::{
    apply_aging, build_sso_schedule, derive_macro, fit_aging, identify_quasi_static, objective_value, segment_sse,
    soc_of_stoich, solve_stoich_limits, sso_identify, AgingCoefficients, AgingObservation, ObjectiveMode, SsoConfig, StaticIdConfig,
    StaticTargets, StepKind,
};
use cellident_core::model::{init_state, CellParameters, FARADAY};
use cellident_core::optimize::SolverConfig;
use cellident_core::profiles::{segment_trace, CutPoints, PulseConfig, PulseSet, QuasiStaticConfig, Regime, SegmentId};
use cellident_core::sensitivity::{Assignment, ParamSpace, SensitivityMatrix, TransportParam};
use cellident_core::VoltageTrace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const V_MIN: f64 = 2.5;
const V_MAX: f64 = 4.2;

fn twin(cycles: u32) -> TwinData {
    generate_twin(
        &DegradationStage::at(cycles).unwrap(),
        &CellParameters::default(),
        &QuasiStaticConfig::default(),
        &PulseConfig::default(),
        (V_MIN, V_MAX),
        0.0,
        0,
    )
    .unwrap()
}

fn ocv(p: &CellParameters, neg: f64, pos: f64) -> f64 {
    p.material.ocp_pos.eval(pos).unwrap() - p.material.ocp_neg.eval(neg).unwrap()
}

#[test]
fn stoich_limits_match_a_grid_scan() {
    let t = twin(0);
    let p = &t.truth.params;
    let id = t.truth.static_targets;
    let lim = solve_stoich_limits(&id, p, V_MIN, V_MAX).unwrap();
    // Walk the conservation line on a fine grid and find where it crosses
    // each voltage limit.
    let ratio = p.material.cs_max_neg * p.composition.eps_s_neg * p.geometry.thick_neg * p.geometry.area_neg
        / (p.material.cs_max_pos * p.composition.eps_s_pos * p.geometry.thick_pos * p.geometry.area_pos);
    let n = 100_000;
    let mut prev: Option<(f64, f64)> = None;
    let (mut at_min, mut at_max) = (None, None);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let y = id.stoich_pos_t0 + (id.stoich_neg_t0 - x) * ratio;
        if !(0.0..=1.0).contains(&y) {
            prev = None;
            continue;
        }
        let v = ocv(p, x, y);
        if let Some((px, pv)) = prev {
            if (pv - V_MIN) * (v - V_MIN) <= 0.0 && at_min.is_none() {
                at_min = Some(0.5 * (px + x));
            }
            if (pv - V_MAX) * (v - V_MAX) <= 0.0 && at_max.is_none() {
                at_max = Some(0.5 * (px + x));
            }
        }
        prev = Some((x, v));
    }
    assert!((lim.stoich_neg_min - at_min.unwrap()).abs() < 2e-5, "{} vs {at_min:?}", lim.stoich_neg_min);
    assert!((lim.stoich_neg_max - at_max.unwrap()).abs() < 2e-5, "{} vs {at_max:?}", lim.stoich_neg_max);
}

#[test]
fn stoich_limits_satisfy_voltage_and_conservation() {
    for stage in DegradationStage::table() {
        let t = twin(stage.cycles);
        let p = &t.truth.params;
        let id = t.truth.static_targets;
        let lim = solve_stoich_limits(&id, p, V_MIN, V_MAX).unwrap();
        assert!((ocv(p, lim.stoich_neg_min, lim.stoich_pos_max) - V_MIN).abs() < 1e-6);
        assert!((ocv(p, lim.stoich_neg_max, lim.stoich_pos_min) - V_MAX).abs() < 1e-6);
        // Moles of lithium at the start equal those at either end.
        let cn = p.capacity_moles_neg();
        let cp = p.capacity_moles_pos();
        let total = id.stoich_neg_t0 * cn + id.stoich_pos_t0 * cp;
        for (xn, xp) in [(lim.stoich_neg_min, lim.stoich_pos_max), (lim.stoich_neg_max, lim.stoich_pos_min)] {
            assert!(((xn * cn + xp * cp) - total).abs() <= 1e-9 * total);
        }
    }
}

#[test]
fn capacity_is_near_nominal_and_fades() {
    let mut last = f64::INFINITY;
    for stage in DegradationStage::table() {
        let t = twin(stage.cycles);
        let p = &t.truth.params;
        let id = t.truth.static_targets;
        let lim = solve_stoich_limits(&id, p, V_MIN, V_MAX).unwrap();
        let mac = derive_macro(&lim, &id, p, V_MIN, V_MAX);
        if stage.cycles == 0 {
            assert!((mac.capacity_mah - 2200.0).abs() < 0.02 * 2200.0, "{}", mac.capacity_mah);
        }
        assert!(mac.capacity_mah < last, "{} cycles: {}", stage.cycles, mac.capacity_mah);
        last = mac.capacity_mah;
        // Cross-check against charge counted from the negative electrode.
        let q = (lim.stoich_neg_max - lim.stoich_neg_min) * p.capacity_moles_neg() * FARADAY / 3.6;
        assert!((q - mac.capacity_mah).abs() < 1e-9 * q);
    }
}

#[test]
fn ocv_curve_spans_the_voltage_window() {
    let t = twin(1000);
    let p = &t.truth.params;
    let id = t.truth.static_targets;
    let lim = solve_stoich_limits(&id, p, V_MIN, V_MAX).unwrap();
    let mac = derive_macro(&lim, &id, p, V_MIN, V_MAX);
    assert!((mac.ocv[0] - V_MIN).abs() < 1e-3);
    assert!((mac.ocv.last().unwrap() - V_MAX).abs() < 1e-3);
    assert!(mac.ocv.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(mac.ocv_at(0.0), mac.ocv[0]);
}

#[test]
fn start_state_sits_on_the_ocv_curve() {
    let t = twin(500);
    let p = &t.truth.params;
    let id = t.truth.static_targets;
    let lim = solve_stoich_limits(&id, p, V_MIN, V_MAX).unwrap();
    let soc = soc_of_stoich(&lim, id.stoich_neg_t0);
    let xn = lim.stoich_neg_min + soc * (lim.stoich_neg_max - lim.stoich_neg_min);
    let xp = lim.stoich_pos_max - soc * (lim.stoich_pos_max - lim.stoich_pos_min);
    assert!((xp - id.stoich_pos_t0).abs() < 1e-9);
    let direct = ocv(p, id.stoich_neg_t0, id.stoich_pos_t0);
    assert!((ocv(p, xn, xp) - direct).abs() < 1e-6);
}

#[test]
fn aging_correlation_reproduces_the_stage_table() {
    let c = AgingCoefficients::nmc811_graphite();
    let s0 = DegradationStage::at(0).unwrap();
    let s4 = DegradationStage::at(2000).unwrap();
    let e = apply_aging(&c, s4.eps_s_neg - s0.eps_s_neg, s4.eps_s_pos - s0.eps_s_pos).unwrap();
    // 6.00 * 0.041^2 - 0.659 * 0.041.
    assert!((e.d_eps_e_neg - (-0.016933)).abs() < 1e-5, "{}", e.d_eps_e_neg);
    let table = s4.eps_e_neg - s0.eps_e_neg;
    assert!((e.d_eps_e_neg - table).abs() < 0.02 * table.abs(), "{} vs {table}", e.d_eps_e_neg);
    assert!(e.film_pos > 0.0 && e.film_neg > 0.0);
}

#[test]
fn aging_fit_on_the_stage_table_recovers_published_coefficients() {
    let c = AgingCoefficients::nmc811_graphite();
    let hist = DegradationStage::aging_history(c.sigma_f0_pos, c.sigma_f0_neg);
    assert_eq!(hist.len(), 4);
    let fit = fit_aging(&hist, c.sigma_f0_pos, c.sigma_f0_neg).unwrap().coefficients;
    assert!((fit.k_e_neg - 6.00).abs() < 0.15 * 6.00, "{}", fit.k_e_neg);
    assert!((fit.b_e_neg - 0.659).abs() < 0.15 * 0.659, "{}", fit.b_e_neg);
}

#[test]
fn aging_fit_is_exact_on_a_parabola() {
    let (k, b) = (4.5, 0.7);
    let hist: Vec<AgingObservation> = [-0.01, -0.02, -0.035, -0.05]
        .iter()
        .map(|&x| {
            let de = k * x * x + b * x;
            AgingObservation { d_eps_s_pos: x / 2.0, d_eps_s_neg: x, d_eps_e_neg: de, film_pos: -300.0 * x, film_neg: -80.0 * de }
        })
        .collect();
    let fit = fit_aging(&hist, 1e-5, 1e-5).unwrap();
    let c = fit.coefficients;
    assert!((c.k_e_neg - k).abs() < 1e-9 && (c.b_e_neg - b).abs() < 1e-9);
    assert!((c.k_f_pos - (-600.0)).abs() < 1e-9 && (c.k_f_neg - (-80.0)).abs() < 1e-9);
    assert!(fit.residuals.iter().flatten().all(|r| r.abs() < 1e-9));
}

fn cuts() -> CutPoints {
    CutPoints { n1: 10, n2: 60, n3: 70, n: 99 }
}

#[test]
fn objective_matches_a_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = cuts();
    for _ in 0..20 {
        let m: Vec<f64> = (0..100).map(|_| 3.5 + rng.random::<f64>()).collect();
        let p: Vec<f64> = (0..100).map(|_| 3.5 + rng.random::<f64>()).collect();
        let direct: f64 = m.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum();
        assert!((segment_sse(&m, &p, &c, ObjectiveMode::Static) - direct).abs() < 1e-12 * direct);
        let mut inst = 0.0;
        for i in (0..=10).chain(60..=70) {
            inst += (m[i] - p[i]).powi(2);
        }
        assert!((segment_sse(&m, &p, &c, ObjectiveMode::Instantaneous) - inst).abs() < 1e-12);
        let mut rest = 0.0;
        for i in 70..=99 {
            rest += ((p[i] - p[70]) - (m[i] - m[70])).powi(2);
        }
        assert!((segment_sse(&m, &p, &c, ObjectiveMode::Rest) - rest).abs() < 1e-12);
    }
}

#[test]
fn relative_modes_ignore_a_constant_offset() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = cuts();
    let m: Vec<f64> = (0..100).map(|_| 3.7 + 0.01 * rng.random::<f64>()).collect();
    let p: Vec<f64> = (0..100).map(|_| 3.7 + 0.01 * rng.random::<f64>()).collect();
    let shifted: Vec<f64> = p.iter().map(|v| v + 0.123).collect();
    for mode in [ObjectiveMode::Excitation, ObjectiveMode::Rest] {
        let a = segment_sse(&m, &p, &c, mode);
        let b = segment_sse(&m, &shifted, &c, mode);
        assert!((a - b).abs() < 1e-12, "{mode:?}");
    }
    assert!(segment_sse(&m, &shifted, &c, ObjectiveMode::Instantaneous) > segment_sse(&m, &p, &c, ObjectiveMode::Instantaneous));
}

#[test]
fn objective_value_rejects_misaligned_traces() {
    let a = VoltageTrace { time: vec![1.0, 2.0], current: vec![0.0; 2], voltage: vec![3.7; 2] };
    let b = VoltageTrace { time: vec![1.0, 2.5], current: vec![0.0; 2], voltage: vec![3.7; 2] };
    assert!(objective_value(&a, &b, None, ObjectiveMode::Static).is_err());
    assert!(objective_value(&a, &a, None, ObjectiveMode::Rest).is_err());
    assert_eq!(objective_value(&a, &a, None, ObjectiveMode::Static).unwrap(), 0.0);
}

fn quick_static() -> StaticIdConfig {
    StaticIdConfig {
        solver: SolverConfig { max_iterations: 200, ..SolverConfig::pso() },
        restarts: 1,
        ..StaticIdConfig::default()
    }
}

#[test]
fn static_identification_recovers_noise_free_truth() {
    let t = twin(1000);
    let truth = t.truth.static_targets;
    // Start the search away from the answer.
    let nominal = StaticTargets {
        stoich_neg_t0: truth.stoich_neg_t0 * 1.05,
        stoich_pos_t0: truth.stoich_pos_t0 * 0.95,
        eps_s_neg: truth.eps_s_neg * 1.04,
        eps_s_pos: truth.eps_s_pos * 0.97,
    };
    let id = identify_quasi_static(&t.quasi_static, &t.quasi_static_profile, &t.truth.params, &nominal, &StaticIdConfig::default())
        .unwrap();
    for (got, want) in id.targets().to_vec().iter().zip(truth.to_vec()) {
        assert!((got - want).abs() < 5e-3 * want, "{got} vs {want}");
    }
    assert!(id.rmse < 1e-3 && !id.poor_fit);
}

#[test]
fn static_identification_is_seed_deterministic() {
    let t = twin(0);
    let nominal = t.truth.static_targets;
    let cfg = quick_static();
    let a = identify_quasi_static(&t.quasi_static, &t.quasi_static_profile, &t.truth.params, &nominal, &cfg).unwrap();
    let b = identify_quasi_static(&t.quasi_static, &t.quasi_static_profile, &t.truth.params, &nominal, &cfg).unwrap();
    assert_eq!(a, b);
}

fn two_pulse_matrix() -> SensitivityMatrix {
    // Segments: 1-2 instantaneous, 3-4 excitation, 5-6 rest.
    SensitivityMatrix {
        params: vec![TransportParam::ContactResistance, TransportParam::IonicConductivity],
        s: vec![vec![0.9, 0.7, 0.0, 0.0, 0.0, 0.0], vec![0.3, 0.6, 0.0, 0.0, 0.0, 0.0]],
        pulses: 2,
        m: 1,
        evaluations: 0,
        failed: 0,
    }
}

#[test]
fn hand_built_schedule() {
    let sens = two_pulse_matrix();
    let a = Assignment {
        instantaneous: sens.params.clone(),
        transport: vec![],
        dropped: vec![],
    };
    let s = build_sso_schedule(&sens, &a).unwrap();
    let summary: Vec<(StepKind, Vec<TransportParam>, SegmentId)> =
        s.steps.iter().map(|st| (st.kind, st.params.clone(), st.segment)).collect();
    assert_eq!(
        summary,
        vec![
            (StepKind::Preliminary, vec![TransportParam::ContactResistance], SegmentId(1)),
            (StepKind::Preliminary, vec![TransportParam::IonicConductivity], SegmentId(2)),
            (
                StepKind::Joint,
                vec![TransportParam::ContactResistance, TransportParam::IonicConductivity],
                SegmentId(2)
            ),
        ]
    );
    assert!(s.steps.iter().all(|st| st.mode == ObjectiveMode::Instantaneous));
    let none = Assignment { instantaneous: vec![], transport: vec![], dropped: sens.params.clone() };
    assert!(build_sso_schedule(&sens, &none).is_err());
}

#[test]
fn stepwise_identification_recovers_contact_resistance() {
    let t = twin(0);
    let p = &t.truth.params;
    let set = PulseSet {
        pulses: t
            .pulse_profiles
            .iter()
            .zip(&t.pulses)
            .map(|(prof, tr)| segment_trace(prof, tr, 1.0).unwrap())
            .collect(),
    };
    let n = set.pulses.len();
    let mut row = vec![0.0; 3 * n];
    row[0] = 1.0;
    let sens = SensitivityMatrix {
        params: vec![TransportParam::ContactResistance],
        s: vec![row],
        pulses: n,
        m: 1,
        evaluations: 0,
        failed: 0,
    };
    let a = Assignment { instantaneous: sens.params.clone(), transport: vec![], dropped: vec![] };
    let schedule = build_sso_schedule(&sens, &a).unwrap();
    assert_eq!(schedule.steps[0].segment, SegmentId::new(0, Regime::Instantaneous, n));
    let space = ParamSpace::of(&[TransportParam::ContactResistance]);
    let init = init_state(p, t.truth.pulse_start.neg, t.truth.pulse_start.pos).unwrap();
    let r = sso_identify(&set, &init, &schedule, &space, p, &SsoConfig::default()).unwrap();
    let got = r.value(TransportParam::ContactResistance).unwrap();
    let want = p.transport.contact_resistance;
    assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
    assert_eq!(r.steps.len(), 2);
    let (pre, joint) = (&r.steps[0], &r.steps[1]);
    assert_eq!(joint.step.kind, StepKind::Joint);
    let v = pre.values[0];
    assert!(joint.values[0] >= 0.95 * v - 1e-15 && joint.values[0] <= 1.05 * v + 1e-15);
}
