use proptest::prelude::*;
use tunnelsplit::field::linspace;
use tunnelsplit::potential::{PotentialSpec, Segment};
use tunnelsplit::splitting::{build_decomposition, Component, Parity, SplitStates};
use tunnelsplit::stationary::EnergyMode;

fn check_invariants(spec: &PotentialSpec, e: f64) -> Result<(), TestCaseError> {
    let s = SplitStates::new(spec, EnergyMode::new(e).unwrap()).unwrap();
    let amp = s.amplitudes();
    let split = s.split();
    prop_assert!(s.midpoint_residual() < 1e-8);
    prop_assert!((split.tr_in.norm_sqr() - amp.transmission).abs() < 1e-10);
    prop_assert!((split.ref_in.norm_sqr() - amp.reflection).abs() < 1e-10);

    let x_c = s.midpoint();
    let half = 0.5 * spec.width() + 3.0;
    let mut scale: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for i in 0..=100 {
        let x = x_c - half + 2.0 * half * i as f64 / 100.0;
        let sum = s.state(Component::WholeTr, x).psi + s.state(Component::WholeRef, x).psi;
        prop_assert!((sum - s.state(Component::Full, x).psi).norm() < 1e-10);
        let d = x - x_c;
        let l = s.state(Component::WholeRef, x_c - d).psi;
        let r = s.state(Component::WholeRef, x_c + d).psi;
        odd = odd.max((l + r).norm());
        scale = scale.max(l.norm());
    }
    prop_assert!(odd <= 1e-7 * scale.max(1e-300));
    Ok(())
}

#[test]
fn rejected_root_is_even() {
    let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
    let s = SplitStates::new(&spec, EnergyMode::new(0.5).unwrap()).unwrap();
    assert_eq!(s.split().parity, Parity::Odd);
    assert_eq!(s.rejected().parity, Parity::Even);
    assert!(s.midpoint_residual() < 1e-8);
    let dec = build_decomposition(&spec, s.mode(), &linspace(-6.0, 6.0, 241)).unwrap();
    let max_rejected = dec.rejected_ref.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(s.rejected_midpoint_residual() > 0.1 * max_rejected);
}

#[test]
fn cut_components_sum_to_full_and_share_outgoing_waves() {
    let spec = PotentialSpec::piecewise(-2.0, vec![Segment::new(1.0, 1.5), Segment::new(2.0, 0.4), Segment::new(1.0, 1.5)]).unwrap();
    let s = SplitStates::new(&spec, EnergyMode::new(0.7).unwrap()).unwrap();
    for i in 0..=80 {
        let x = -8.0 + 16.0 * i as f64 / 80.0;
        let sum = s.state(Component::Tr, x).psi + s.state(Component::Ref, x).psi;
        assert!((sum - s.state(Component::Full, x).psi).norm() < 1e-10, "x={x}");
        if x > s.midpoint() {
            assert_eq!(s.state(Component::Ref, x).psi.norm(), 0.0);
        }
    }
    let amp = s.amplitudes();
    assert!((s.outgoing_amplitude(Component::Tr) - amp.transmitted).norm() < 1e-12);
    assert!((s.outgoing_amplitude(Component::Ref) - amp.reflected).norm() < 1e-12);
}

#[test]
fn opaque_barriers_keep_the_invariants() {
    // kappa L = 30: T ~ 1e-26
    for &(v0, l) in &[(8.0, 7.5), (2.0, 15.0)] {
        let spec = PotentialSpec::rectangular(v0, l, -l / 2.0).unwrap();
        check_invariants(&spec, v0 / 2.0).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_on_random_rectangles(v0 in 0.25..8.0f64, l in 0.5..8.0f64, ratio in 0.04..2.0f64) {
        let spec = PotentialSpec::rectangular(v0, l, -l / 2.0).unwrap();
        check_invariants(&spec, ratio * v0)?;
    }

    #[test]
    fn invariants_on_random_three_segment_barriers(
        w1 in 0.2..1.5f64, h1 in -0.5..3.0f64, w2 in 0.2..1.5f64, h2 in -0.5..3.0f64, e in 0.1..4.0f64,
    ) {
        let spec = PotentialSpec::piecewise(0.0, vec![Segment::new(w1, h1), Segment::new(w2, h2), Segment::new(w1, h1)]).unwrap();
        check_invariants(&spec, e)?;
    }
}
