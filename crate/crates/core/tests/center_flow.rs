use std::f64::consts::{FRAC_PI_2, TAU};

use contact_defects::center_flow::*;
use contact_defects::scalar_saddle::{travel_time_direct, Leg, SaddleField, SaddleWindow};
use contact_defects::Error;
use proptest::prelude::*;

#[test]
fn separable_trajectory() {
    let f = SaddleField::quadratic();
    let tr = integrate_center(&f, 0.0, (0.0, -0.5), (0.0, 10.0), 0.5, 101).unwrap();
    for (x, a, y) in tr.samples() {
        assert!((y + 1.0 / (x + 2.0)).abs() < 1e-11);
        let exact = (-((x + 2.0) / 2.0).ln()).rem_euclid(TAU);
        let d = (a - exact).abs();
        assert!(d.min(TAU - d) < 1e-10);
        assert!((0.0..TAU).contains(&a));
    }
    assert!((tr.drift() + 6f64.ln()).abs() < 1e-10);
}

#[test]
fn crossing_time_matches_arctan_and_scalar_module() {
    let f = SaddleField::quadratic();
    let eps = 1e-2;
    let (x, _) = center_crossing(&f, eps * eps, (0.0, -0.5), 0.0, 1e4, 0.5).unwrap();
    assert!((x - (50f64).atan() / eps).abs() / x < 1e-10);

    let q = SaddleField::quartic();
    let (x, _) = center_crossing(&q, eps * eps, (0.0, -0.5), 0.0, 1e4, 0.5).unwrap();
    let t = travel_time_direct(&q, eps, 0.5, Leg::MinusToZero, &SaddleWindow::default()).unwrap().t;
    assert!((x - t).abs() / t < 1e-9);
}

#[test]
fn blowup_is_reported() {
    let f = SaddleField::quadratic();
    let e = integrate_center(&f, 0.0, (0.0, 0.5), (0.0, 10.0), 0.5, 11).unwrap_err();
    assert!(matches!(e, Error::Blowup { .. }));
}

#[test]
fn passage_examples() {
    let f = SaddleField::quadratic();
    let r = passage_report(&f, 0.01, 0.5).unwrap();
    assert!((0.01 * r.l_of_eps - 50f64.atan()).abs() < 1e-10);
    assert!((0.01 * r.l_of_eps - 1.5508).abs() < 1e-4);
    let drift = -0.5 * (1.0 + 0.25 / 1e-4f64).ln();
    assert!((r.alpha_drift - drift).abs() < 1e-8);
    assert!((r.alpha_drift + 3.912).abs() < 1e-3);
}

#[test]
fn quartic_passage_is_linear_in_eps() {
    let q = SaddleField::quartic();
    let h: Vec<f64> =
        [1e-2, 5e-3, 2.5e-3].iter().map(|&e| e * passage_report(&q, e, 0.5).unwrap().l_of_eps - FRAC_PI_2).collect();
    // Halving ε halves the defect to leading order.
    assert!((h[0] / h[1] - 2.0).abs() < 0.05);
    assert!((h[1] / h[2] - 2.0).abs() < 0.05);
}

#[test]
fn local_expansions() {
    let f = SaddleField::quadratic();
    let r = local_expansion_check(&f, 0.01, 0.5).unwrap();
    assert!(r.err_near_zero <= 1.1);
    assert!(r.err_near_boundary.is_finite());

    let r0 = local_expansion_check(&f, 0.0, 0.5).unwrap();
    assert_eq!(r0.err_near_zero, 0.0);
    // y = -δ0/(1 + δ0 x): second-order remainder is δ0³x²/(1 + δ0 x).
    assert!(r0.err_near_boundary <= 2.0);

    let q = SaddleField::quartic();
    let a = local_expansion_check(&q, 0.01, 0.5).unwrap();
    let b = local_expansion_check(&q, 0.005, 0.5).unwrap();
    assert!(a.err_near_zero < 1.0 && b.err_near_zero < 1.0);
    assert!(a.err_near_boundary < 3.0 && b.err_near_boundary < 3.0);
}

#[test]
fn phase_drift_is_logarithmic() {
    let z = phase_drift_log_check(&SaddleField::quadratic(), (10.0, 1000.0)).unwrap();
    assert!((z.slope + 1.0).abs() < 0.01);
    assert!(z.residual < 1e-2);
    let q = phase_drift_log_check(&SaddleField::quartic(), (10.0, 1000.0)).unwrap();
    assert!((q.slope + 1.0).abs() < 0.05);
    let c = phase_drift_log_check(&SaddleField::cubic(1.0), (10.0, 1000.0)).unwrap();
    assert!(c.slope.is_finite() && c.residual < 1e-2);
}

#[test]
fn drift_is_additive() {
    let q = SaddleField::quartic();
    let run = |a: f64, b: f64, y0: f64| integrate_center(&q, 1e-4, (0.0, y0), (a, b), 0.5, 2).unwrap();
    let whole = run(0.0, 20.0, -0.5);
    let first = run(0.0, 7.0, -0.5);
    let y_mid = *first.y.last().unwrap();
    let second = run(7.0, 20.0, y_mid);
    assert!((first.drift() + second.drift() - whole.drift()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reverser_conjugates_directions(a0 in -3.0f64..3.0, y0 in -0.3f64..0.3, h in 0.1f64..1.0) {
        let q = SaddleField::quartic();
        let fwd = integrate_center(&q, 1e-3, (a0, y0), (0.0, h), 0.5, 2).unwrap();
        let bwd = integrate_center(&q, 1e-3, (a0, -y0), (0.0, -h), 0.5, 2).unwrap();
        prop_assert!((fwd.alpha_lift[1] - bwd.alpha_lift[1]).abs() < 1e-10);
        prop_assert!((fwd.y[1] + bwd.y[1]).abs() < 1e-10);
    }
}
