use std::f64::consts::TAU;

use contact_defects::models::*;
use contact_defects::wave_trains::*;
use proptest::prelude::*;

fn lo(gamma: f64) -> (ReactionDiffusionSystem, WaveTrain) {
    let sys = lambda_omega(&LambdaOmegaParams { gamma, ..LambdaOmegaParams::default() }).unwrap();
    let wt = find_wave_train(&sys, |t| vec![0.9 * t.cos(), 0.9 * t.sin() + 0.05 * (2.0 * t).cos()], 16).unwrap();
    (sys, wt)
}

#[test]
fn lambda_omega_wave_train() {
    let (_, wt) = lo(0.5);
    assert!((wt.omega_d - 0.5).abs() < 1e-8);
    assert!((wt.amplitude() - 1.0).abs() < 1e-8);
    assert!(wt.residual < 1e-10);
    // Reality: c_0 real, coefficients beyond the first harmonic vanish.
    let c = wt.fourier_coeffs();
    assert!(c[0][0].im == 0.0);
    assert!(c[0][3].norm() < 1e-12);
}

#[test]
fn scaled_guess_finds_same_circle() {
    let (sys, wt) = lo(0.5);
    let scaled = find_wave_train(&sys, |t| vec![1.2 * (t + 0.3).cos(), 1.2 * (t + 0.3).sin()], 16).unwrap();
    assert!((scaled.omega_d - wt.omega_d).abs() < 1e-10);
    assert!((scaled.amplitude() - 1.0).abs() < 1e-10);
}

#[test]
fn quintic_wave_train() {
    let p = CglQuinticParams::default();
    let sys = cgl_quintic(&p).unwrap();
    let r = p.amplitude_squared().sqrt();
    let wt = find_wave_train(&sys, |t| vec![r * t.cos(), r * t.sin()], 16).unwrap();
    assert!(wt.residual <= 1e-10);
    assert!((wt.omega_d - p.omega_d()).abs() < 1e-10);
}

#[test]
fn lambda_omega_dispersion() {
    let (sys, wt) = lo(0.5);
    let nl = nonlinear_dispersion(&sys, &wt, &[-0.2, -0.1, 0.0, 0.1, 0.2]).unwrap();
    assert!((nl.omega_nl_pp0 - 1.0).abs() < 1e-4);
    let at0 = nl.samples.iter().find(|s| s.0 == 0.0).unwrap();
    assert!((at0.1 - wt.omega_d).abs() < 1e-12);
    for &(k, w) in &nl.samples {
        assert!((w - (1.0 - 0.5 * (1.0 - k * k))).abs() < 1e-9);
    }
    let lin = linear_dispersion(&sys, &wt, &[-0.2, -0.1, 0.0, 0.1, 0.2]).unwrap();
    assert!((lin.lambda_lin_pp0 + 2.0).abs() < 1e-3);
    let i0 = lin.samples.iter().position(|s| s.0 == 0.0).unwrap();
    assert!(lin.lambda(i0).norm() < 1e-8);
    for i in 0..lin.samples.len() {
        let j = lin.samples.iter().position(|s| s.0 == -lin.samples[i].0).unwrap();
        assert!((lin.lambda(i) - lin.lambda(j).conj()).norm() < 1e-9);
    }
}

#[test]
fn hypotheses_for_lambda_omega() {
    let (sys, wt) = lo(0.5);
    let h = check_hypotheses(&sys, &wt).unwrap();
    assert_eq!(h.zero_multiplicity, 2);
    assert!(h.h2_pass && h.h5_pass, "{h:?}");
    assert!(h.reversers_verified, "{:?}", h.reverser_defects);
    assert!((h.spectral_gap - 0.5).abs() < 1e-6);
    assert!(h.inconclusive.is_empty(), "{:?}", h.inconclusive);

    let (sys0, wt0) = lo(0.0);
    let h0 = check_hypotheses(&sys0, &wt0).unwrap();
    assert!(!h0.omega_nl_pp0_nonzero);
    assert!(!h0.h5_pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn translation_equivariance(alpha in 0.0f64..TAU) {
        let (sys, wt) = lo(0.5);
        let shifted = wt.translate(alpha);
        let again = find_wave_train(&sys, |t| shifted.eval(t), 16).unwrap();
        let err = again.values.iter().zip(&shifted.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err < 1e-10);
        // Coefficients rotate by e^{inα}; moduli are invariant.
        let (c0, c1) = (wt.fourier_coeffs(), shifted.fourier_coeffs());
        for n in 0..=8 {
            prop_assert!((c0[0][n].norm() - c1[0][n].norm()).abs() < 1e-12);
        }
    }
}
