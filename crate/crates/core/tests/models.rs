use contact_defects::models::*;
use proptest::prelude::*;

#[test]
fn lambda_omega_evaluation() {
    let sys = lambda_omega(&LambdaOmegaParams::default()).unwrap();
    let mut out = [0.0; 2];
    sys.f(&[1.0, 0.0], &mut out);
    assert_eq!(out, [0.0, 0.5]);
    assert!(sys.jacobian_fd_error(32) < 1e-7);
}

#[test]
fn quintic_reduces_to_cubic() {
    let p = CglQuinticParams { mu: 1.0, omega0: 1.0, gamma: 0.5, c_r: -1e-300, c_i: 0.0, diffusion: [1.0, 1.0] };
    let cgl = cgl_quintic(&p).unwrap();
    let lo = lambda_omega(&LambdaOmegaParams::default()).unwrap();
    let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
    for u in [[0.3, -0.7], [1.2, 0.4], [-0.1, 0.0]] {
        cgl.f(&u, &mut a);
        lo.f(&u, &mut b);
        assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    }
    assert!(cgl_quintic(&CglQuinticParams::default()).unwrap().jacobian_fd_error(32) < 1e-7);
}

#[test]
fn quintic_damping_is_required() {
    let p = CglQuinticParams { c_r: 0.1, ..CglQuinticParams::default() };
    assert!(cgl_quintic(&p).is_err());
}

#[test]
fn homogeneous_oscillation_of_lambda_omega() {
    let p = LambdaOmegaParams::default();
    assert_eq!(p.omega_d(), 0.5);
    let sys = lambda_omega(&p).unwrap();
    // u = (cos ωt, sin ωt) satisfies u_t = f(u).
    let mut out = [0.0; 2];
    let t: f64 = 0.8;
    let w = p.omega_d();
    sys.f(&[(w * t).cos(), (w * t).sin()], &mut out);
    assert!((out[0] + w * (w * t).sin()).abs() < 1e-15);
    assert!((out[1] - w * (w * t).cos()).abs() < 1e-15);
}

#[test]
fn quintic_homogeneous_amplitude() {
    let p = CglQuinticParams::default();
    let s = p.amplitude_squared();
    assert!((p.mu - s + p.c_r * s * s).abs() < 1e-14);
    assert!(s > 0.0);
}

fn rotate(u: [f64; 2], phi: f64) -> [f64; 2] {
    let (c, s) = (phi.cos(), phi.sin());
    [c * u[0] - s * u[1], s * u[0] + c * u[1]]
}

proptest! {
    #[test]
    fn gauge_equivariance(a in -1.5f64..1.5, b in -1.5f64..1.5, phi in 0.0f64..6.3,
                          gamma in -2.0f64..2.0, ci in -1.0f64..1.0) {
        let lo = lambda_omega(&LambdaOmegaParams { gamma, ..LambdaOmegaParams::default() }).unwrap();
        let cgl = cgl_quintic(&CglQuinticParams { gamma, c_i: ci, ..CglQuinticParams::default() }).unwrap();
        for sys in [&lo, &cgl] {
            let (mut f1, mut f2) = ([0.0; 2], [0.0; 2]);
            sys.f(&rotate([a, b], phi), &mut f1);
            sys.f(&[a, b], &mut f2);
            let r = rotate(f2, phi);
            prop_assert!((f1[0] - r[0]).abs() < 1e-12 * (1.0 + r[0].abs()));
            prop_assert!((f1[1] - r[1]).abs() < 1e-12 * (1.0 + r[1].abs()));
        }
    }
}
