mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tunnelsplit::potential::{PotentialSpec, Segment};
use tunnelsplit::stationary::{det, solve_full, total_transfer, BoundaryAmplitudes, EnergyMode, Scatterer};

fn random_symmetric(rng: &mut StdRng) -> PotentialSpec {
    let n = rng.gen_range(1..=3);
    let half: Vec<Segment> = (0..n)
        .map(|_| Segment::new(rng.gen_range(0.2..0.8), rng.gen_range(-0.5..2.5)))
        .collect();
    let mut segs = half.clone();
    if rng.gen_bool(0.5) {
        segs.push(Segment::new(rng.gen_range(0.2..0.8), rng.gen_range(-0.5..2.5)));
    }
    segs.extend(half.iter().rev().copied());
    let width: f64 = segs.iter().map(|s| s.width).sum();
    PotentialSpec::piecewise(rng.gen_range(-3.0..3.0) - width / 2.0, segs).unwrap()
}

#[test]
fn canonical_closed_form_value() {
    let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
    let amp = solve_full(&spec, EnergyMode::new(0.5).unwrap()).unwrap();
    let expected = 1.0 / (1.0 + 2.0f64.sinh().powi(2));
    assert_relative_eq!(amp.transmission, expected, max_relative = 1e-13);
    assert_relative_eq!(amp.transmission, 0.070651, epsilon = 1e-6);
    assert_relative_eq!(
        amp.transmission,
        common::rectangular_transmission(1.0, 2.0, 0.5),
        max_relative = 1e-13
    );
}

#[test]
fn degenerate_energy_row() {
    for &(v0, l) in &[(0.25, 0.5), (1.0, 2.0), (3.0, 1.5), (8.0, 8.0)] {
        let spec = PotentialSpec::rectangular(v0, l, 0.0).unwrap();
        let amp = solve_full(&spec, EnergyMode::new(v0).unwrap()).unwrap();
        assert_relative_eq!(amp.transmission, 1.0 / (1.0 + v0 * l * l / 2.0), max_relative = 1e-12);
    }
}

#[test]
fn transfer_matrix_against_ode() {
    let spec = PotentialSpec::rectangular(2.0, 1.0, 0.0).unwrap();
    let mode = EnergyMode::new(1.0).unwrap();
    let m = total_transfer(&spec, mode).unwrap();
    assert!((det(&m) - 1.0).norm() < 1e-12);
    let amp = solve_full(&spec, mode).unwrap();
    let (t, r) = common::ode_amplitudes(&spec, 1.0, 1e-3);
    assert!((amp.transmitted - t).norm() < 1e-9, "{} vs {t}", amp.transmitted);
    assert!((amp.reflected - r).norm() < 1e-9, "{} vs {r}", amp.reflected);
}

#[test]
fn random_piecewise_barriers_against_ode() {
    let mut rng = StdRng::seed_from_u64(17);
    for case in 0..12 {
        let spec = random_symmetric(&mut rng);
        let e = rng.gen_range(0.2..3.0);
        let mode = EnergyMode::new(e).unwrap();
        let amp = solve_full(&spec, mode).unwrap();
        let (t, r) = common::ode_amplitudes(&spec, e, 1e-3);
        assert_relative_eq!(amp.transmission, t.norm_sqr(), max_relative = 1e-6);
        assert!((amp.reflected - r).norm() < 1e-6, "case {case}: r {} vs {r}", amp.reflected);

        let sc = Scatterer::new(&spec, mode).unwrap();
        let c = sc.coefficients(BoundaryAmplitudes::left(1.0.into(), amp.reflected));
        let (lo, hi) = (spec.left_edge() - 1.0, spec.right_edge() + 1.0);
        for j in 0..=20 {
            let x = lo + (hi - lo) * j as f64 / 20.0;
            let ours = sc.state(c, x).psi;
            let reference = common::ode_full_psi(&spec, e, x, 1e-3);
            assert!((ours - reference).norm() < 1e-6, "case {case} x={x}: {ours} vs {reference}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitarity_on_random_rectangles(v0 in 0.05..10.0f64, l in 0.1..8.0f64, ratio in 0.02..3.0f64) {
        let spec = PotentialSpec::rectangular(v0, l, -l / 2.0).unwrap();
        let amp = solve_full(&spec, EnergyMode::new(ratio * v0).unwrap()).unwrap();
        prop_assert!((amp.transmission + amp.reflection - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shifting_the_barrier_keeps_t_and_r(v0 in 0.1..4.0f64, l in 0.2..4.0f64, e in 0.1..5.0f64, shift in -20.0..20.0f64) {
        let a = PotentialSpec::rectangular(v0, l, 0.0).unwrap();
        let b = PotentialSpec::rectangular(v0, l, shift).unwrap();
        let mode = EnergyMode::new(e).unwrap();
        let (ta, tb) = (solve_full(&a, mode).unwrap(), solve_full(&b, mode).unwrap());
        prop_assert!((ta.transmission - tb.transmission).abs() < 1e-10 * ta.transmission.max(1e-300) + 1e-14);
        prop_assert!((ta.reflection - tb.reflection).abs() < 1e-10);
    }
}
