use cellident_core::model::{
    init_state, init_state_on, simulate, simulate_with, static_step, static_voltages, CellParameters, Discretization,
    ModelError, OcpCurve, SpmeSolver, StoichPair, FARADAY,
};
use cellident_core::profiles::CurrentProfile;
use proptest::prelude::*;

fn fresh() -> CellParameters {
    CellParameters::default()
}

#[test]
fn ocp_is_exact_at_nodes_and_bounded_between() {
    let x: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let v: Vec<f64> = x.iter().map(|t| 4.2 - t * t).collect();
    let c = OcpCurve::new(x.clone(), v.clone()).unwrap();
    assert_eq!(c.eval(0.5).unwrap(), v[10]);
    let mid = c.eval(0.525).unwrap();
    assert!(mid <= v[10] && mid >= v[11]);
    assert!(matches!(c.eval(1.01), Err(ModelError::Domain(_))));
}

#[test]
fn ocp_matches_reference_pchip() {
    // Reference values from an independent PCHIP implementation on the
    // bundled tables.
    let g = OcpCurve::graphite();
    let n = OcpCurve::nmc811();
    let cases = [
        (&g, 0.1025, 0.30066982337867937),
        (&g, 0.3475, 0.21585804870281028),
        (&g, 0.5025, 0.19422796418253935),
        (&g, 0.7525, 0.1769173122158241),
        (&g, 0.9025, 0.12546544654751313),
        (&n, 0.1025, 4.592219680259398),
        (&n, 0.3475, 4.177027087724823),
        (&n, 0.5025, 3.9687808975425236),
        (&n, 0.7525, 3.687586602011136),
        (&n, 0.9025, 3.5661777574375),
    ];
    for (c, x, want) in cases {
        let got = c.eval(x).unwrap();
        assert!((got - want).abs() < 1e-9, "{x}: {got} vs {want}");
    }
}

#[test]
fn static_step_identities() {
    let p = fresh();
    let (n, q, v) = static_step(0.5, 0.55, 0.0, 200.0, &p).unwrap();
    assert_eq!((n, q), (0.5, 0.55));
    assert_eq!(v, p.ocv(StoichPair { neg: 0.5, pos: 0.55 }).unwrap());

    let (n1, q1, _) = static_step(0.5, 0.55, 2.2, 200.0, &p).unwrap();
    let (n2, q2, _) = static_step(n1, q1, -2.2, 200.0, &p).unwrap();
    assert!((n2 - 0.5).abs() < 1e-15 && (q2 - 0.55).abs() < 1e-15);
}

#[test]
fn static_step_hand_arithmetic() {
    let p = fresh();
    let m = &p.material;
    let g = &p.geometry;
    let c = &p.composition;
    let cap = m.density_neg / m.molar_mass_neg * c.eps_s_neg * g.area_neg * g.thick_neg;
    let expect = 2.2 * 200.0 / (FARADAY * cap);
    let (n1, _, _) = static_step(0.5, 0.55, 2.2, 200.0, &p).unwrap();
    let got = 0.5 - n1;
    assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
}

#[test]
fn init_state_ocv_is_definitional() {
    let p = fresh();
    let s = init_state(&p, 0.486, 0.536).unwrap();
    let prof = CurrentProfile::new(1.0, vec![0.0; 30], "rest").unwrap();
    let t = simulate(&prof, &p, &s).unwrap();
    let ocv = p.material.ocp_pos.eval(0.536).unwrap() - p.material.ocp_neg.eval(0.486).unwrap();
    for v in &t.voltage {
        assert!((v - ocv).abs() < 1e-12);
    }
}

#[test]
fn low_rate_dynamic_matches_static_within_1mv() {
    let p = fresh();
    let i = 0.01 * 2.2;
    let prof = CurrentProfile::new(1.0, vec![i; 2000], "0.01C").unwrap();
    let s = init_state(&p, 0.55, 0.49).unwrap();
    let dynamic = simulate(&prof, &p, &s).unwrap();
    let stat = static_voltages(0.55, 0.49, &vec![i; 2000], 1.0, &p).unwrap();
    let worst = dynamic.voltage.iter().zip(&stat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "worst gap {worst}");
}

#[test]
fn lithium_is_conserved() {
    let p = fresh();
    let disc = Discretization::default();
    let mut samples = vec![0.0; 20];
    samples.extend(vec![2.2; 300]);
    samples.extend(vec![-1.1; 200]);
    samples.extend(vec![0.0; 100]);
    let prof = CurrentProfile::new(0.1, samples.clone(), "mixed").unwrap();
    let mut state = init_state(&p, 0.55, 0.49).unwrap();
    let solid0 = state.solid_lithium(&p, &disc);
    let elyte0 = state.elyte_lithium(&p, &disc);
    let mut solver = SpmeSolver::new(&p, disc.clone(), 0.1).unwrap();
    for &i in &samples {
        solver.step(&mut state, i).unwrap();
    }
    let charge = prof.charge();
    // Discharge moves lithium from the negative to the positive particle:
    // solid total is unchanged, and the negative electrode alone loses
    // charge / F.
    let solid1 = state.solid_lithium(&p, &disc);
    assert!((solid1 - solid0).abs() <= 1e-6 * solid0);
    let elyte1 = state.elyte_lithium(&p, &disc);
    assert!((elyte1 - elyte0).abs() <= 1e-6 * elyte0, "{elyte0} -> {elyte1}");
    let s0 = init_state(&p, 0.55, 0.49).unwrap().mean_stoich(&p, &disc);
    let s1 = state.mean_stoich(&p, &disc);
    let moved = (s0.neg - s1.neg) * p.capacity_moles_neg();
    assert!((moved - charge / FARADAY).abs() <= 1e-6 * (charge / FARADAY), "{moved} vs {}", charge / FARADAY);
}

#[test]
fn instantaneous_drop_grows_with_contact_resistance() {
    let mut samples = vec![0.0; 10];
    samples.extend(vec![2.2; 10]);
    let prof = CurrentProfile::new(0.1, samples, "step").unwrap();
    let mut last = 0.0;
    for rc in [0.0, 0.005, 0.01, 0.02, 0.04] {
        let mut p = fresh();
        p.transport.contact_resistance = rc;
        let s = init_state(&p, 0.55, 0.49).unwrap();
        let t = simulate(&prof, &p, &s).unwrap();
        let drop = t.voltage[9] - t.voltage[10];
        assert!(drop > last, "R_c {rc}: drop {drop} not above {last}");
        last = drop;
    }
}

#[test]
fn long_pulse_voltage_approaches_a_line() {
    let p = fresh();
    let prof = CurrentProfile::new(0.1, vec![2.2; 1200], "120 s").unwrap();
    let s = init_state(&p, 0.55, 0.49).unwrap();
    let v = simulate(&prof, &p, &s).unwrap().voltage;
    // Second differences on a 1 s stride.
    let curv = |a: usize, b: usize| {
        (a..b - 20)
            .step_by(10)
            .map(|k| (v[k + 20] - 2.0 * v[k + 10] + v[k]).abs())
            .fold(0.0, f64::max)
    };
    let early = curv(10, 200);
    let late = curv(1000, 1200);
    assert!(late < 0.1 * early, "late {late} early {early}");
}

#[test]
fn grid_refinement_changes_pulse_voltage_by_under_0p2_mv() {
    let p = fresh();
    let mut samples = vec![0.0; 50];
    samples.extend(vec![2.2; 600]);
    samples.extend(vec![0.0; 400]);
    let prof = CurrentProfile::new(0.1, samples, "pulse").unwrap();
    let base = Discretization::default();
    let fine = base.refined(2);
    let a = simulate_with(&prof, &p, &init_state_on(&p, 0.55, 0.49, &base).unwrap(), base).unwrap();
    let b = simulate_with(&prof, &p, &init_state_on(&p, 0.55, 0.49, &fine).unwrap(), fine).unwrap();
    let worst = a.voltage.iter().zip(&b.voltage).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-4, "{worst}");
}

#[test]
fn simulation_is_deterministic() {
    let p = fresh();
    let mut samples = vec![0.0; 20];
    samples.extend(vec![2.2; 150]);
    samples.extend(vec![0.0; 100]);
    let prof = CurrentProfile::new(0.1, samples, "pulse").unwrap();
    let s = init_state(&p, 0.55, 0.49).unwrap();
    let a = simulate(&prof, &p, &s).unwrap();
    let b = simulate(&prof, &p, &s).unwrap();
    assert!(a.voltage.iter().zip(&b.voltage).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn failures_name_the_time() {
    let p = fresh();
    let prof = CurrentProfile::new(1.0, vec![100.0; 5000], "abuse").unwrap();
    let s = init_state(&p, 0.55, 0.49).unwrap();
    match simulate(&prof, &p, &s) {
        Err(ModelError::AtTime { time, .. }) => assert!(time > 0.0),
        other => panic!("expected a timed failure, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conservation_for_random_profiles(
        currents in proptest::collection::vec(-3.0f64..3.0, 5..40),
        start in 0.35f64..0.7,
    ) {
        let p = fresh();
        let disc = Discretization::default();
        let pos = p.pos_on_inventory_line(start);
        let s0 = init_state(&p, start, pos).unwrap();
        // Each random level held for 2 s.
        let samples: Vec<f64> = currents.iter().flat_map(|&c| std::iter::repeat_n(c, 20)).collect();
        let mut state = s0.clone();
        let mut solver = SpmeSolver::new(&p, disc.clone(), 0.1).unwrap();
        for &i in &samples {
            solver.step(&mut state, i).unwrap();
        }
        let q: f64 = samples.iter().sum::<f64>() * 0.1 / FARADAY;
        let moved = (s0.mean_stoich(&p, &disc).neg - state.mean_stoich(&p, &disc).neg) * p.capacity_moles_neg();
        prop_assert!((moved - q).abs() <= 1e-6 * q.abs().max(1e-3 * p.capacity_moles_neg()));
        let e0 = s0.elyte_lithium(&p, &disc);
        prop_assert!((state.elyte_lithium(&p, &disc) - e0).abs() <= 1e-6 * e0);
    }
}
