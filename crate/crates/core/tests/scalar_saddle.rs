use std::f64::consts::{FRAC_PI_2, PI};

use contact_defects::ode::OdeOptions;
use contact_defects::scalar_saddle::*;
use contact_defects::Error;
use proptest::prelude::*;

/// `∫_lo^hi dy / F(y)` after `y = ε tan θ`, composite Simpson. Independent of the library.
fn quad_time(f: impl Fn(f64) -> f64, eps: f64, lo: f64, hi: f64) -> f64 {
    let (t0, t1) = ((lo / eps).atan(), (hi / eps).atan());
    let n = 40_000;
    let h = (t1 - t0) / n as f64;
    let g = |t: f64| {
        let c = t.cos();
        eps / (c * c) / f(eps * t.tan())
    };
    let mut s = g(t0) + g(t1);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(t0 + k as f64 * h);
    }
    s * h / 3.0
}

/// Real root of `u³ + p u + q` by bisection.
fn cubic_root(p: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0, 2.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m * m * m + p * m + q > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    0.5 * (lo + hi)
}

fn w() -> SaddleWindow {
    SaddleWindow::default()
}

#[test]
fn event_on_pure_quadratic_at_zero_eps() {
    let f = SaddleField::quadratic();
    let hit = integrate_to_event(&f, 0.0, -1.0, -0.5, 10.0, OdeOptions::default()).unwrap();
    assert!((hit.x_hit - 1.0).abs() < 1e-11);
}

#[test]
fn event_matches_arctan() {
    let f = SaddleField::quadratic();
    let hit = integrate_to_event(&f, 0.1, 0.0, 0.5, 100.0, OdeOptions::default()).unwrap();
    assert!((hit.x_hit - 13.7340076694).abs() < 1e-9);
}

#[test]
fn event_matches_quadrature_for_quartic() {
    let f = SaddleField::quartic();
    let eps = 0.05;
    let hit = integrate_to_event(&f, eps, 0.0, 0.5, 1e4, OdeOptions::default()).unwrap();
    let oracle = quad_time(|y| eps * eps + y * y + y.powi(4), eps, 0.0, 0.5);
    assert!((hit.x_hit - oracle).abs() / oracle < 1e-9);
}

#[test]
fn event_blocked_by_equilibrium() {
    let f = SaddleField::quadratic();
    let err = integrate_to_event(&f, 0.0, -0.5, 0.5, 1e3, OdeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::EventNotReached { .. }));
}

#[test]
fn direct_time_examples() {
    let f = SaddleField::quadratic();
    let r = travel_time_direct(&f, 0.1, 0.5, Leg::ZeroToPlus, &w()).unwrap();
    assert!((r.t - 13.7340076694).abs() < 1e-9);
    assert_eq!(r.method, TravelMethod::DirectOde);
    let r = travel_time_direct(&f, 0.05, 0.5, Leg::Full, &w()).unwrap();
    assert!((0.05 * r.t - 2.0 * 10f64.atan()).abs() < 1e-10);
    assert!((0.05 * r.t - 2.9422553486).abs() < 1e-9);

    let q = SaddleField::quartic();
    let r = travel_time_direct(&q, 0.01, 0.5, Leg::ZeroToPlus, &w()).unwrap();
    assert!((0.01 * r.t - FRAC_PI_2).abs() <= 0.05);
    let oracle = quad_time(|y| 1e-4 + y * y + y.powi(4), 0.01, 0.0, 0.5);
    assert!((r.t - oracle).abs() / oracle < 1e-9);
}

#[test]
fn direct_time_rejections() {
    let f = SaddleField::quadratic();
    assert!(matches!(travel_time_direct(&f, 0.0, 0.5, Leg::ZeroToPlus, &w()), Err(Error::NonMonotone(_))));
    assert!(matches!(travel_time_direct(&f, 0.01, 3.0, Leg::ZeroToPlus, &w()), Err(Error::DomainError(_))));
    assert!(matches!(travel_time_direct(&f, 0.2, 0.5, Leg::ZeroToPlus, &w()), Err(Error::DomainError(_))));
    let c = SaddleField::cubic(2.0);
    assert!(matches!(travel_time_direct(&c, 1e-3, 1.0, Leg::MinusToZero, &w()), Err(Error::NonMonotone(_))));
}

#[test]
fn full_leg_is_sum_of_halves() {
    let f = SaddleField::polynomial("mix", &[(3, 0, 0.7), (4, 0, 1.0)]).unwrap();
    let full = travel_time_direct(&f, 0.02, 0.5, Leg::Full, &w()).unwrap();
    let a = travel_time_direct(&f, 0.02, 0.5, Leg::MinusToZero, &w()).unwrap();
    let b = travel_time_direct(&f, 0.02, 0.5, Leg::ZeroToPlus, &w()).unwrap();
    let tol = full.err_estimate + a.err_estimate + b.err_estimate + 1e-12 * full.t;
    assert!((full.t - a.t - b.t).abs() <= tol);
}

#[test]
fn normal_form_of_pure_quadratic_is_trivial() {
    let nf = fit_normal_form(&SaddleField::quadratic(), 5).unwrap();
    assert!(nf.a.iter().chain(&nf.b).all(|v| v.abs() < 1e-14));
    assert!((nf.n0(0.3) - 0.3).abs() < 1e-14);
    assert!((nf.psi(0.2, 0.01) - 0.2).abs() < 1e-14);
    assert!(nf.residual_norm < 1e-10);
}

#[test]
fn normal_form_of_cubic() {
    let nf = fit_normal_form(&SaddleField::cubic(1.0), 5).unwrap();
    assert_eq!(nf.a(0.0), 0.0);
    assert!((nf.b(0.0) - 1.0).abs() < 1e-14);
    assert!((nf.psi(0.3, 0.0) - 0.3).abs() < 1e-14);
}

#[test]
fn normal_form_of_quartic_matches_elimination() {
    // Hand elimination of ω + Ψ² + Ψ⁴ = Ψ_z N by weight:
    // z⁰: n0 = ω; z¹: ψ0 = 0; z²: a = -3ψ3 ω; z⁴: ψ3 = 1; z⁵: ψ4 = 0, so b = 0.
    let nf = fit_normal_form(&SaddleField::quartic(), 5).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-10;
    assert!(close(nf.n0[0], 0.0) && close(nf.n0[1], 1.0) && close(nf.n0[2], 0.0));
    assert!(close(nf.a[0], 0.0) && close(nf.a[1], -3.0));
    assert!(nf.b.iter().all(|b| close(*b, 0.0)));
    assert!(close(nf.psi[3][0], 1.0) && close(nf.psi[4][0], 0.0));
    assert!(nf.psi[0].iter().all(|v| close(*v, 0.0)));
    assert!(nf.residual_norm < 1e-10);
}

#[test]
fn normal_form_needs_order_four() {
    assert!(matches!(fit_normal_form(&SaddleField::quartic(), 3), Err(Error::OrderTooLow { .. })));
    assert!(matches!(fit_normal_form(&SaddleField::quartic(), 9), Err(Error::OrderTooLow { .. })));
}

#[test]
fn partial_fraction_matches_arctan() {
    let nf = fit_normal_form(&SaddleField::quadratic(), 5).unwrap();
    let r = travel_time_partial_fraction(&nf, 0.1, 0.5, Leg::ZeroToPlus).unwrap();
    assert!((r.result.t - 13.7340076694).abs() < 1e-9);
    assert!((r.result.t - 10.0 * 5f64.atan()).abs() < 1e-12);
}

#[test]
fn partial_fraction_matches_direct_for_cubic() {
    let f = SaddleField::cubic(1.0);
    let nf = fit_normal_form(&f, 5).unwrap();
    let pf = travel_time_partial_fraction(&nf, 0.01, 0.5, Leg::ZeroToPlus).unwrap();
    let d = travel_time_direct(&f, 0.01, 0.5, Leg::ZeroToPlus, &w()).unwrap();
    assert!((pf.result.t - d.t).abs() / d.t <= 1e-8);
    let pf = travel_time_partial_fraction(&nf, 0.01, 0.5, Leg::MinusToZero).unwrap();
    let d = travel_time_direct(&f, 0.01, 0.5, Leg::MinusToZero, &w()).unwrap();
    assert!((pf.result.t - d.t).abs() / d.t <= 1e-8);
}

#[test]
fn log_term_weight_from_cubic_root() {
    let nf = fit_normal_form(&SaddleField::cubic(1.0), 5).unwrap();
    let eps = 0.01;
    let pf = travel_time_partial_fraction(&nf, eps, 0.5, Leg::ZeroToPlus).unwrap();
    let u1 = cubic_root(1.0, eps);
    let a1 = u1 / (3.0 * u1 * u1 + 1.0);
    assert!((pf.split.u1 - u1).abs() < 1e-14);
    assert!((pf.split.log_coefficient() + a1).abs() < 1e-10);
    // -u1 alone is right to leading order only.
    assert!((pf.split.log_coefficient() + u1).abs() < 4.0 * u1.abs().powi(3));
}

#[test]
fn log_coefficient_examples() {
    let grid: Vec<f64> = (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
    let q = extract_log_coefficient(&SaddleField::quartic(), &grid, 0.5, &w()).unwrap();
    let m = q.eta_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(m <= 1e-3, "max |eta| = {m}");

    let z = extract_log_coefficient(&SaddleField::quadratic(), &grid, 0.5, &w()).unwrap();
    for ((e, eta), zeta) in z.eps.iter().zip(&z.eta_samples).zip(&z.zeta_samples) {
        let noise = if *e <= 0.03 { 1e-6 } else { 2e-4 };
        assert!(eta.abs() < noise, "eta({e}) = {eta}");
        // ε T_+ - π/2 = -arctan(ε/δ)
        assert!((zeta + (e / 0.5).atan()).abs() < 10.0 * noise);
    }

    let c = extract_log_coefficient(&SaddleField::cubic(1.0), &grid, 0.5, &w()).unwrap();
    let i = grid.iter().position(|e| (e - 1e-2).abs() < 1e-12).unwrap();
    assert!((c.eta_samples[i] / 1e-2 - 1.0).abs() < 0.1, "{}", c.eta_samples[i]);
    assert!((c.slope_at_zero - 1.0).abs() < 0.1, "{}", c.slope_at_zero);
}

#[test]
fn log_coefficient_needs_a_decade() {
    let grid: Vec<f64> = (0..8).map(|k| 0.01 + 0.001 * k as f64).collect();
    let e = extract_log_coefficient(&SaddleField::quartic(), &grid, 0.5, &w()).unwrap_err();
    assert!(matches!(e, Error::GridTooCoarse(_)));
}

#[test]
fn epsilon_star_for_pure_quadratic() {
    let f = SaddleField::quadratic();
    let r = solve_epsilon_for_length(&f, 1000.0, 0.5, &w()).unwrap();
    // Oracle: bisection on (1/ε) arctan(δ/ε) = L.
    let (mut lo, mut hi) = (1e-5f64, 0.1f64);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if (0.5 / m).atan() / m > 1000.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    assert!((r.epsilon_star - lo).abs() / lo < 1e-9);
    assert!((r.epsilon_star - 1.567661e-3).abs() < 1e-9);
    assert!(r.residual.abs() <= 1e-10 * 1000.0);

    let r = solve_epsilon_for_length(&f, 1e4, 0.5, &w()).unwrap();
    assert!((r.epsilon_star * 1e4 - FRAC_PI_2).abs() < 1e-3);
    let lead = -FRAC_PI_2 / 1e8;
    assert!((r.derivative - lead).abs() / lead.abs() < 0.05);
}

#[test]
fn epsilon_star_decreases_for_quartic() {
    let f = SaddleField::quartic();
    let mut prev = f64::INFINITY;
    for l in [250.0, 500.0, 1000.0, 2000.0] {
        let r = solve_epsilon_for_length(&f, l, 0.5, &w()).unwrap();
        assert!(r.residual.abs() <= 1e-10 * l);
        assert!(r.epsilon_star < prev);
        prev = r.epsilon_star;
        let t = travel_time_direct(&f, r.epsilon_star, 0.5, Leg::MinusToZero, &w()).unwrap().t;
        assert!((t - l).abs() <= 1e-10 * l);
    }
}

#[test]
fn epsilon_star_needs_long_interval() {
    let e = solve_epsilon_for_length(&SaddleField::quadratic(), 5.0, 0.5, &w()).unwrap_err();
    assert!(matches!(e, Error::NoBracket { .. }));
}

#[test]
fn asymptote_examples() {
    let r = asymptote_check(&SaddleField::quadratic(), (10.0, 1000.0)).unwrap();
    assert_eq!(r.weight, AsymptoteWeight::XSquared);
    assert!(r.sup_deviation <= 1.01);

    let q1 = asymptote_check(&SaddleField::quartic(), (10.0, 1000.0)).unwrap();
    let q2 = asymptote_check(&SaddleField::quartic(), (10.0, 2000.0)).unwrap();
    assert_eq!(q1.weight, AsymptoteWeight::XSquared);
    assert!((q2.sup_deviation - q1.sup_deviation).abs() < 0.05 * q1.sup_deviation);

    let c1 = asymptote_check(&SaddleField::cubic(1.0), (10.0, 1000.0)).unwrap();
    let c2 = asymptote_check(&SaddleField::cubic(1.0), (10.0, 2000.0)).unwrap();
    assert_eq!(c1.weight, AsymptoteWeight::XSquaredOverLog);
    assert!(c2.sup_deviation < 1.05 * c1.sup_deviation);
    assert!(c2.sup_x2 > c1.sup_x2 * 1.05);
}

#[test]
fn arctan_identity_for_full_leg() {
    let f = SaddleField::quadratic();
    for &eps in &[1e-4, 1e-3, 1e-2] {
        let r = travel_time_direct(&f, eps, 0.5, Leg::Full, &w()).unwrap();
        assert!((eps * r.t - (PI - 2.0 * (eps / 0.5).atan())).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn time_is_monotone(e in 1e-3f64..0.05, d in 0.25f64..0.9, c in -1.0f64..1.0) {
        let f = SaddleField::polynomial("p", &[(3, 0, c), (4, 0, 1.0)]).unwrap();
        let t = travel_time_direct(&f, e, d, Leg::ZeroToPlus, &w()).unwrap().t;
        let te = travel_time_direct(&f, e * 1.01, d, Leg::ZeroToPlus, &w()).unwrap().t;
        let td = travel_time_direct(&f, e, d * 1.01, Leg::ZeroToPlus, &w()).unwrap().t;
        prop_assert!(te < t);
        prop_assert!(td > t);
    }

    #[test]
    fn mirrored_normal_form_times_the_other_leg(e in 1e-3f64..0.05, d in 0.25f64..0.5, c in -0.5f64..0.5) {
        let f = SaddleField::cubic(c);
        let nf = fit_normal_form(&f, 5).unwrap();
        let a = travel_time_partial_fraction(&nf, e, d, Leg::MinusToZero).unwrap().result.t;
        let b = travel_time_partial_fraction(&nf.mirrored(), e, d, Leg::ZeroToPlus).unwrap().result.t;
        prop_assert!((a - b).abs() <= 1e-12 * a);
        let direct = travel_time_direct(&f, e, d, Leg::MinusToZero, &w()).unwrap().t;
        prop_assert!((a - direct).abs() <= 1e-8 * direct);
    }

    #[test]
    fn normal_form_residual_is_small(c3 in -1.0f64..1.0, c4 in -1.0f64..1.0, c21 in -1.0f64..1.0) {
        let f = SaddleField::polynomial("p", &[(3, 0, c3), (4, 0, c4), (2, 1, c21)]).unwrap();
        let nf = fit_normal_form(&f, 5).unwrap();
        prop_assert!(nf.residual_norm < 1e-10);
        prop_assert!(nf.a(0.0).abs() < 1e-14);
        prop_assert!((nf.b(0.0) - c3).abs() < 1e-12);
    }
}
