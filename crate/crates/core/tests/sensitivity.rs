use std::f64::consts::PI;

use cellident_core::sensitivity::{
    assign, sample_matrices, total_effect, ParamSpace, SensitivityMatrix, SobolSequence, TransportParam,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A space of `d` dimensions over `[lo, hi]`; the parameter labels are
/// placeholders.
fn unit_space(d: usize, lo: f64, hi: f64) -> ParamSpace {
    ParamSpace {
        params: TransportParam::ALL[..d].to_vec(),
        lower: vec![lo; d],
        upper: vec![hi; d],
    }
}

fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
}

/// Analytic total-effect indices of the Ishigami function, a = 7, b = 0.1.
fn ishigami_totals() -> [f64; 3] {
    let (a, b) = (7.0f64, 0.1f64);
    let v1 = 0.5 * (1.0 + b * PI.powi(4) / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = b * b * PI.powi(8) * (1.0 / 18.0 - 1.0 / 50.0);
    let v = v1 + v2 + v13;
    [(v1 + v13) / v, v2 / v, v13 / v]
}

/// Centered L2 discrepancy of points in the unit square.
fn centered_discrepancy(pts: &[Vec<f64>]) -> f64 {
    let n = pts.len() as f64;
    let d = pts[0].len() as i32;
    let mut a = 0.0;
    for p in pts {
        a += p.iter().map(|&x| 1.0 + 0.5 * (x - 0.5).abs() - 0.5 * (x - 0.5).powi(2)).product::<f64>();
    }
    let mut b = 0.0;
    for p in pts {
        for q in pts {
            b += p
                .iter()
                .zip(q)
                .map(|(&x, &y)| 1.0 + 0.5 * (x - 0.5).abs() + 0.5 * (y - 0.5).abs() - 0.5 * (x - y).abs())
                .product::<f64>();
        }
    }
    ((13.0f64 / 12.0).powi(d) - 2.0 * a / n + b / (n * n)).sqrt()
}

#[test]
fn sobol_points_are_in_unit_cube_and_start_at_half() {
    let pts = SobolSequence::sample(1, 3).unwrap();
    assert_eq!(pts, vec![vec![0.5], vec![0.75], vec![0.25]]);
    for p in SobolSequence::sample(16, 1024).unwrap() {
        assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
    }
    assert!(SobolSequence::new(0).is_err());
    assert!(SobolSequence::new(SobolSequence::MAX_DIM + 1).is_err());
}

#[test]
fn sobol_points_are_more_even_than_random_ones() {
    let n = 256;
    let sobol = SobolSequence::sample(2, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
    let (ds, dr) = (centered_discrepancy(&sobol), centered_discrepancy(&random));
    assert!(ds < 0.5 * dr, "sobol {ds} random {dr}");
}

#[test]
fn sample_matrices_shape_and_swap_rule() {
    let space = ParamSpace::default();
    let m = 50;
    let mats = sample_matrices(&space, m).unwrap();
    assert_eq!(mats.xi.len(), 2 * m);
    assert!(mats.xi.iter().all(|r| r.len() == 8));
    assert_eq!(mats.radial.len(), 8);
    for k in 0..8 {
        assert_eq!(mats.radial[k].len(), m);
        for j in 0..m {
            for c in 0..8 {
                let want = if c == k { mats.xi[m + j][c] } else { mats.xi[j][c] };
                assert_eq!(mats.radial[k][j][c], want);
            }
        }
    }
}

#[test]
fn sample_columns_span_their_ranges() {
    let space = ParamSpace::default();
    let mats = sample_matrices(&space, 512).unwrap();
    let t = TransportParam::ALL.iter().position(|&p| p == TransportParam::Transference).unwrap();
    let col: Vec<f64> = mats.xi.iter().map(|r| r[t]).collect();
    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo >= 0.2 && hi <= 0.45);
    assert!(lo < 0.201 && hi > 0.449, "[{lo}, {hi}]");
}

#[test]
fn single_input_function_puts_all_effect_on_it() {
    let mats = sample_matrices(&unit_space(4, 0.0, 1.0), 512).unwrap();
    let s = total_effect(|x| (3.0 * x[0]).exp(), &mats).unwrap();
    assert!((s[0] - 1.0).abs() < 0.05, "{s:?}");
    assert!(s[1..].iter().all(|v| v.abs() < 1e-12), "{s:?}");
}

#[test]
fn ishigami_totals_match_analytic_values() {
    let mats = sample_matrices(&unit_space(3, -PI, PI), 4096).unwrap();
    let s = total_effect(ishigami, &mats).unwrap();
    for (got, want) in s.iter().zip(ishigami_totals()) {
        assert!((got - want).abs() < 0.02, "{s:?} vs {:?}", ishigami_totals());
    }
}

#[test]
fn additive_function_totals_sum_to_one() {
    let mats = sample_matrices(&unit_space(5, 0.0, 1.0), 2048).unwrap();
    let c = [1.0, 2.0, 0.5, 3.0, 1.5];
    let s = total_effect(|x| x.iter().zip(&c).map(|(a, b)| a * b).sum(), &mats).unwrap();
    let sum: f64 = s.iter().sum();
    assert!((sum - 1.0).abs() < 0.03, "{sum}");
    let total_var: f64 = c.iter().map(|v| v * v).sum();
    for (got, ck) in s.iter().zip(&c) {
        assert!((got - ck * ck / total_var).abs() < 0.02);
    }
}

#[test]
fn estimates_settle_as_the_sample_grows() {
    let est = |m: usize| total_effect(ishigami, &sample_matrices(&unit_space(3, -PI, PI), m).unwrap()).unwrap();
    let change = |m: usize| {
        let (a, b) = (est(m), est(2 * m));
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 3.0
    };
    let changes: Vec<f64> = [250, 500, 1000, 2000].into_iter().map(change).collect();
    assert!(changes.windows(2).all(|w| w[1] < w[0]), "{changes:?}");
}

#[test]
fn estimates_are_deterministic() {
    let mats = sample_matrices(&unit_space(3, -PI, PI), 256).unwrap();
    let a = total_effect(ishigami, &mats).unwrap();
    let b = total_effect(ishigami, &mats).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn bad_spaces_are_rejected() {
    let mut s = ParamSpace::default();
    s.upper[2] = s.lower[2];
    assert!(sample_matrices(&s, 8).is_err());
    assert!(sample_matrices(&ParamSpace::default(), 0).is_err());
}

fn matrix(rows: Vec<Vec<f64>>) -> SensitivityMatrix {
    SensitivityMatrix {
        params: TransportParam::ALL[..rows.len()].to_vec(),
        pulses: rows[0].len() / 3,
        s: rows,
        m: 1,
        evaluations: 0,
        failed: 0,
    }
}

#[test]
fn assignment_follows_the_largest_regime_mean() {
    // Two pulses: segments 1-2 instantaneous, 3-4 excitation, 5-6 rest.
    let sens = matrix(vec![
        vec![0.9, 0.8, 0.1, 0.1, 0.0, 0.0],
        vec![0.0, 0.0, 0.3, 0.2, 0.5, 0.6],
        vec![0.001, 0.0, 0.005, 0.0, 0.0, 0.0],
    ]);
    let a = assign(&sens, 0.01);
    assert_eq!(a.instantaneous, vec![TransportParam::ALL[0]]);
    assert_eq!(a.transport, vec![TransportParam::ALL[1]]);
    assert_eq!(a.dropped, vec![TransportParam::ALL[2]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignment_is_a_partition(
        rows in proptest::collection::vec(proptest::collection::vec(-0.05f64..1.0, 12), 8),
        threshold in 0.0f64..0.5,
    ) {
        let sens = matrix(rows);
        let a = assign(&sens, threshold);
        let mut all: Vec<_> = a.instantaneous.iter().chain(&a.transport).chain(&a.dropped).copied().collect();
        prop_assert_eq!(all.len(), 8);
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), 8);
        for (k, row) in sens.s.iter().enumerate() {
            let max = row.iter().cloned().fold(0.0f64, f64::max);
            prop_assert_eq!(a.dropped.contains(&sens.params[k]), max < threshold);
        }
    }
}
