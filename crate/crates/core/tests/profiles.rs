use cellident_core::identify::{soc_of_stoich, solve_stoich_limits, StaticTargets};
use cellident_core::model::{CellParameters, ModelError};
use cellident_core::profiles::{
    find_stoich_for_ocv, gen_pulse_set, gen_quasi_static, segment_trace, CurrentProfile, PulseConfig, QuasiStaticConfig,
    Regime, SegmentId,
};
use cellident_core::VoltageTrace;

fn ocv_on_line(p: &CellParameters, x: f64) -> f64 {
    let pos = p.pos_on_inventory_line(x);
    p.material.ocp_pos.eval(pos).unwrap() - p.material.ocp_neg.eval(x).unwrap()
}

#[test]
fn quasi_static_defaults() {
    let p = CellParameters::default();
    let (prof, start) = gen_quasi_static(&p, &QuasiStaticConfig::default()).unwrap();
    assert_eq!(prof.len(), 100);
    assert_eq!(prof.dt, 200.0);
    assert!(prof.samples.iter().all(|&i| (i - 0.022).abs() < 1e-15));
    assert!((prof.duration() - 20_000.0).abs() < 1e-9);
    assert_eq!(*prof.times().last().unwrap(), 20_000.0);
    assert!((ocv_on_line(&p, start.neg) - 3.8).abs() < 1e-9);
}

#[test]
fn quasi_static_rejects_bad_config() {
    let p = CellParameters::default();
    let mut cfg = QuasiStaticConfig::default();
    cfg.samples = 0;
    assert!(gen_quasi_static(&p, &cfg).is_err());
    let mut cfg = QuasiStaticConfig::default();
    cfg.start_ocv = 5.5;
    assert!(gen_quasi_static(&p, &cfg).is_err());
}

#[test]
fn stoich_for_ocv_matches_grid_scan() {
    let p = CellParameters::default();
    let target = 3.7;
    let x = find_stoich_for_ocv(&p, target).unwrap();
    // Nearest grid point on a fine scan of the line.
    let n = 10_000;
    let (mut best, mut gap) = (0.0, f64::INFINITY);
    for i in 0..=n {
        let xn = 0.05 + 0.9 * i as f64 / n as f64;
        let pos = p.pos_on_inventory_line(xn);
        if !(0.0..=1.0).contains(&pos) {
            continue;
        }
        let g = (ocv_on_line(&p, xn) - target).abs();
        if g < gap {
            gap = g;
            best = xn;
        }
    }
    assert!((x.neg - best).abs() < 1e-4, "{} vs {best}", x.neg);
    assert!((ocv_on_line(&p, x.neg) - target).abs() < 1e-9);
}

#[test]
fn stoich_for_ocv_hits_range_ends_and_rejects_outside() {
    let p = CellParameters::default();
    match find_stoich_for_ocv(&p, 10.0) {
        Err(ModelError::OcvOutOfRange { low, high, .. }) => {
            let lo = find_stoich_for_ocv(&p, low).unwrap();
            let hi = find_stoich_for_ocv(&p, high).unwrap();
            assert!(lo.neg < hi.neg);
            assert!((ocv_on_line(&p, lo.neg.max(1e-12)) - low).abs() < 1e-6);
        }
        other => panic!("expected out of range, got {other:?}"),
    }
}

#[test]
fn fresh_cell_at_3v8_sits_mid_window() {
    let p = CellParameters::default();
    let x = find_stoich_for_ocv(&p, 3.8).unwrap();
    let id = StaticTargets {
        stoich_neg_t0: x.neg,
        stoich_pos_t0: x.pos,
        eps_s_neg: p.composition.eps_s_neg,
        eps_s_pos: p.composition.eps_s_pos,
    };
    let lim = solve_stoich_limits(&id, &p, 2.5, 4.2).unwrap();
    let soc = soc_of_stoich(&lim, x.neg);
    assert!((0.5..=0.7).contains(&soc), "{soc}");
}

#[test]
fn pulse_set_defaults() {
    let cfg = PulseConfig::default();
    let set = gen_pulse_set(&cfg);
    assert_eq!(set.len(), 4);
    let total: f64 = set.iter().map(|p| p.duration()).sum();
    assert!((total - 645.0).abs() < 1e-9, "{total}");
    for (p, d) in set.iter().zip([15.0, 30.0, 60.0, 120.0]) {
        let on: Vec<_> = p.samples.iter().filter(|&&i| i != 0.0).collect();
        assert_eq!(on.len(), (d * 10.0) as usize);
        assert!(on.iter().all(|&&i| (i - 2.2).abs() < 1e-12));
        assert!((p.charge() - 2.2 * d).abs() < 1e-9);
    }
    let charge = PulseConfig { discharge: false, ..cfg };
    assert!(gen_pulse_set(&charge)[0].samples.iter().all(|&i| i <= 0.0));
}

#[test]
fn segments_cover_every_sample() {
    let set = gen_pulse_set(&PulseConfig::default());
    for p in &set {
        let trace = VoltageTrace { time: p.times(), current: p.samples.clone(), voltage: vec![3.7; p.len()] };
        let st = segment_trace(p, &trace, 1.0).unwrap();
        let mut hits = vec![0; p.len()];
        for r in Regime::ALL {
            for range in st.cuts.ranges(r) {
                for k in range {
                    hits[k] += 1;
                }
            }
        }
        assert!(hits.iter().all(|&h| h >= 1), "{}", p.label);
        assert_eq!(st.cuts.n, p.len() - 1);
    }
}

#[test]
fn segment_numbering_is_regime_major() {
    let p = 4;
    assert_eq!(SegmentId::new(0, Regime::Instantaneous, p), SegmentId(1));
    assert_eq!(SegmentId::new(3, Regime::Instantaneous, p), SegmentId(4));
    assert_eq!(SegmentId::new(0, Regime::Excitation, p), SegmentId(5));
    assert_eq!(SegmentId::new(3, Regime::Rest, p), SegmentId(12));
    for k in 1..=12 {
        let s = SegmentId(k);
        assert_eq!(SegmentId::new(s.pulse(p), s.regime(p), p), s);
    }
}

#[test]
fn segmentation_rejects_misaligned_and_flat_profiles() {
    let p = &gen_pulse_set(&PulseConfig::default())[0];
    let short = VoltageTrace { time: vec![0.1], current: vec![0.0], voltage: vec![3.7] };
    assert!(segment_trace(p, &short, 1.0).is_err());
    let flat = CurrentProfile::new(0.1, vec![0.0; 100], "flat").unwrap();
    let t = VoltageTrace { time: flat.times(), current: flat.samples.clone(), voltage: vec![3.7; 100] };
    assert!(segment_trace(&flat, &t, 1.0).is_err());
}

#[test]
fn generators_are_deterministic() {
    let a = gen_pulse_set(&PulseConfig::default());
    let b = gen_pulse_set(&PulseConfig::default());
    assert_eq!(a, b);
    let p = CellParameters::default();
    let c = gen_quasi_static(&p, &QuasiStaticConfig::default()).unwrap();
    let d = gen_quasi_static(&p, &QuasiStaticConfig::default()).unwrap();
    assert_eq!(c, d);
}

#[test]
fn profile_csv_round_trip() {
    let p = &gen_pulse_set(&PulseConfig::default())[1];
    let back = CurrentProfile::from_csv(&p.to_csv(), &p.label).unwrap();
    assert_eq!(back.len(), p.len());
    assert!((back.dt - p.dt).abs() < 1e-12);
    assert_eq!(back.samples, p.samples);
    assert!(CurrentProfile::from_csv("t,i\n0,1\n", "x").is_err());
    assert!(CurrentProfile::from_csv("time_s,current_A\n0.1,1\n0.2\n", "x").is_err());
}
