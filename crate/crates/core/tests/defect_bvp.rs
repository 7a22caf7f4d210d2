use std::f64::consts::{PI, TAU};

use contact_defects::defect_bvp::*;
use contact_defects::models::{cgl_quintic, lambda_omega, CglQuinticParams, LambdaOmegaParams};
use contact_defects::wave_trains::{find_wave_train, ReactionDiffusionSystem, WaveTrain};
use contact_defects::Error;
use proptest::prelude::*;

fn lambda_omega_setup() -> (ReactionDiffusionSystem, WaveTrain) {
    let sys = lambda_omega(&LambdaOmegaParams::default()).unwrap();
    let wt = find_wave_train(&sys, |t| vec![t.cos(), t.sin()], 16).unwrap();
    (sys, wt)
}

fn cgl_setup() -> (ReactionDiffusionSystem, WaveTrain) {
    let p = CglQuinticParams::default();
    let sys = cgl_quintic(&p).unwrap();
    let r = p.amplitude_squared().sqrt();
    let wt = find_wave_train(&sys, |t| vec![r * t.cos(), r * t.sin()], 16).unwrap();
    (sys, wt)
}

fn flat(wt: &WaveTrain, grid: &SpaceTimeGrid) -> Vec<f64> {
    build_initial_guess(wt, grid, 0.0, grid.l / 4.0).unwrap()
}

fn as_defect(grid: &SpaceTimeGrid, dim: usize, u: Vec<f64>, omega: f64) -> TruncatedDefect {
    TruncatedDefect {
        grid: grid.clone(),
        dim,
        u,
        omega,
        residual_norm: 0.0,
        newton_iters: 0,
        residual_history: vec![],
        sigma_min: f64::NAN,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn grid_is_symmetric_and_validated() {
    let g = SpaceTimeGrid::new(10.0, 101, 16).unwrap();
    for i in 0..g.n_x {
        assert_eq!(g.x_nodes[i], -g.x_nodes[g.n_x - 1 - i]);
    }
    assert!(g.x_nodes.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(g.x_nodes[50], 0.0);
    assert!(matches!(SpaceTimeGrid::new(10.0, 63, 16), Err(Error::ConfigInvalid(_))));
    assert!(matches!(SpaceTimeGrid::new(10.0, 64, 6), Err(Error::ConfigInvalid(_))));
    let s = SpaceTimeGrid::with_spacing(16.0, 0.25, 16).unwrap();
    assert_eq!(s.n_x, 129);
    assert!((s.h() - 0.25).abs() < 1e-15);
}

#[test]
fn wave_train_is_an_equilibrium_of_the_residual() {
    let (sys, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let u = flat(&wt, &grid);
    let r = assemble_residual(&sys, &grid, &u, wt.omega_d, &u).unwrap();
    assert!(max_abs(&r) <= 1e-10, "{}", max_abs(&r));

    // Perturbing ω shifts each interior row by δω·u_τ.
    let dw = 1e-4;
    let r = assemble_residual(&sys, &grid, &u, wt.omega_d + dw, &u).unwrap();
    let n = u.len();
    let norm_r = r[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
    // |u_τ| = 1 pointwise on the unit circle.
    let norm_ut = (n as f64 / 2.0).sqrt();
    assert!((norm_r / (dw * norm_ut) - 1.0).abs() < 1e-8);
    assert!(matches!(assemble_residual(&sys, &grid, &u[1..], wt.omega_d, &u), Err(Error::ShapeMismatch(_))));
}

#[test]
fn newton_from_the_wave_train_stops_immediately() {
    let (sys, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let u = flat(&wt, &grid);
    let d = newton_solve(&sys, &grid, &u, wt.omega_d).unwrap();
    assert!(d.newton_iters <= 2);
    assert!((d.omega - wt.omega_d).abs() < 1e-10);
    assert_eq!(check_reversibility(&d, Reverser::R0), 0.0);
    assert!(d.boundary_dx() <= 1e-12);
}

#[test]
fn translation_is_recovered() {
    let (_, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let g = build_initial_guess(&wt, &grid, PI, 2.0).unwrap();
    let d1 = as_defect(&grid, 2, g, wt.omega_d);
    let d2 = d1.translate(0.7);
    let (alpha, mismatch) = check_uniqueness_mod_translation(&d1, &d2).unwrap();
    assert!((alpha - 0.7).abs() < 1e-8, "{alpha}");
    assert!(mismatch < 1e-10);
    let d3 = as_defect(&grid, 2, flat(&wt, &grid), wt.omega_d);
    assert!(check_uniqueness_mod_translation(&d1, &d3).unwrap().1 > 0.5);
}

#[test]
fn phase_of_a_translated_wave_train() {
    let (_, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let a0 = 1.3;
    let d = as_defect(&grid, 2, flat(&wt, &grid), wt.omega_d).translate(a0);
    let pc = extract_phase_coordinates(&d, &wt).unwrap().strict().unwrap();
    for i in 0..grid.n_x {
        assert!((pc.alpha_l[i] - a0).abs() < 1e-10);
        assert!(pc.y_l[i].abs() < 1e-10);
        assert!(pc.fit_residuals[i] < 1e-7);
    }
}

#[test]
fn phase_jump_guess_has_the_prescribed_jump() {
    let (_, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(20.0, 161, 16).unwrap();
    let d = as_defect(&grid, 2, build_initial_guess(&wt, &grid, PI, 2.0).unwrap(), wt.omega_d);
    let pc = extract_phase_coordinates(&d, &wt).unwrap();
    let jump = pc.alpha_l[grid.n_x - 1] - pc.alpha_l[0];
    assert!((jump - PI * (10.0f64).tanh()).abs() < 1e-8, "{jump}");
    // y_L agrees with a centred difference of α_L.
    let h = grid.h();
    let a = &pc.alpha_l;
    for i in 2..grid.n_x - 2 {
        let fd = (a[i - 2] - 8.0 * a[i - 1] + 8.0 * a[i + 1] - a[i + 2]) / (12.0 * h);
        assert!((fd - pc.y_l[i]).abs() < 1e-3, "{i}: {fd} vs {}", pc.y_l[i]);
    }
    assert!(matches!(build_initial_guess(&wt, &grid, PI, 10.0), Err(Error::ConfigInvalid(_))));
}

#[test]
fn dark_core_guess_is_rpi_symmetric() {
    let (_, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let d = as_defect(&grid, 2, build_dark_core_guess(&wt, &grid, 3.0, 3.0).unwrap(), wt.omega_d);
    assert!(check_reversibility(&d, Reverser::Rpi) < 1e-12);
    assert!(check_reversibility(&d, Reverser::R0) > 0.5);
    let pc = extract_phase_coordinates(&d, &wt).unwrap();
    assert_eq!(pc.ambiguous, vec![32]);
    assert!(matches!(pc.strict(), Err(Error::FitAmbiguous(x)) if x == 0.0));
}

#[test]
fn family_needs_four_members() {
    let (_, wt) = lambda_omega_setup();
    let grid = SpaceTimeGrid::new(8.0, 65, 16).unwrap();
    let d = as_defect(&grid, 2, flat(&wt, &grid), wt.omega_d);
    assert!(matches!(verify_scaling(&[d.clone(), d], &wt), Err(Error::InsufficientFamily(_))));
}

/// Converged contact defect on the swept CGL model at a small box.
#[test]
fn cgl_defect_converges_symmetric_and_unique() {
    let (sys, wt) = cgl_setup();
    let grid = SpaceTimeGrid::with_spacing(16.0, 0.5, 16).unwrap();
    let d1 = newton_solve(&sys, &grid, &build_dark_core_guess(&wt, &grid, 5.0, 3.0).unwrap(), wt.omega_d).unwrap();
    assert!(d1.residual_norm <= 1e-8);
    assert!(d1.quadratic_tail(), "{:?}", d1.residual_history);
    assert!(d1.omega > wt.omega_d);
    assert!(check_reversibility(&d1, Reverser::Rpi) <= 1e-6);
    assert!(d1.boundary_dx() <= 1e-10);
    assert!(d1.sigma_min > 1e-6);

    let d2 = newton_solve(
        &sys,
        &grid,
        &build_dark_core_guess(&wt, &grid, 4.5, 2.5).unwrap().iter().map(|v| v * 1.02).collect::<Vec<_>>(),
        wt.omega_d,
    )
    .unwrap();
    let (_, mismatch) = check_uniqueness_mod_translation(&d1, &d2).unwrap();
    assert!(mismatch <= 1e-6, "{mismatch}");
    assert!((d1.omega - d2.omega).abs() < 1e-9);

    // Equivariance: a τ-translate re-solves to itself.
    let shifted = d1.translate(1.1);
    let d3 = newton_solve(&sys, &grid, &shifted.u, d1.omega).unwrap();
    let (alpha, mismatch) = check_uniqueness_mod_translation(&d1, &d3).unwrap();
    assert!(mismatch <= 1e-9, "{mismatch}");
    assert!((alpha - 1.1).abs() < 1e-8);

    let pc = extract_phase_coordinates(&d1, &wt).unwrap();
    assert!(pc.y_l[0].abs() < 1e-9 && pc.y_l[grid.n_x - 1].abs() < 1e-9);
    // Phase far from the core tracks the wave train closely.
    assert!(pc.fit_residuals[grid.n_x - 1] < 1e-2);
}

#[test]
fn extension_keeps_the_core_and_stretches_the_tail() {
    let grid = SpaceTimeGrid::with_spacing(16.0, 0.5, 8).unwrap();
    let cubic = |x: f64| 0.3 + x * (0.1 - 0.002 * x * x);
    let mut u = Vec::new();
    for &x in &grid.x_nodes {
        for j in 0..8 {
            u.extend_from_slice(&[cubic(x), j as f64]);
        }
    }
    let d = as_defect(&grid, 2, u, -1.0);
    let (g2, u2) = extend_defect(&d, 24.0).unwrap();
    assert_eq!(g2.h(), grid.h());
    assert_eq!(g2.n_x, 97);
    let (core, scale) = (8.0, 8.0 / 16.0);
    for (i, &x) in g2.x_nodes.iter().enumerate() {
        let xo = if x.abs() <= core { x } else { x.signum() * (core + (x.abs() - core) * scale) };
        let v = u2[i * 16];
        // Exact for cubics away from the reflected ends.
        if xo.abs() < 15.0 {
            assert!((v - cubic(xo)).abs() < 1e-12, "x = {x}: {v} vs {}", cubic(xo));
        }
        assert!((u2[i * 16 + 7 * 2 + 1] - 7.0).abs() < 1e-12);
    }
    assert_eq!(u2[0], d.u[0]);
    assert_eq!(u2[u2.len() - 16], d.u[d.u.len() - 16]);
    let (g3, u3) = extend_defect(&d, 16.0).unwrap();
    assert_eq!(g3.n_x, grid.n_x);
    assert_eq!(u3, d.u);
}

#[test]
fn continuation_down_returns_to_the_direct_solution() {
    let (sys, wt) = cgl_setup();
    let grid = SpaceTimeGrid::with_spacing(16.0, 0.5, 16).unwrap();
    let d16 = newton_solve(&sys, &grid, &build_dark_core_guess(&wt, &grid, 5.0, 3.0).unwrap(), wt.omega_d).unwrap();
    let opts = ContinuationOptions::default();
    let up = continue_in_l(&sys, &d16, &[16.0, 24.0], &opts).unwrap();
    let down = continue_in_l(&sys, up.last().unwrap(), &[24.0, 16.0], &opts).unwrap();
    let back = down.last().unwrap();
    assert_eq!(back.grid.n_x, grid.n_x);
    assert!((back.omega - d16.omega).abs() < 1e-9, "{} vs {}", back.omega, d16.omega);
    let (_, mismatch) = check_uniqueness_mod_translation(&d16, back).unwrap();
    assert!(mismatch < 1e-6, "{mismatch}");
    assert!(continue_in_l(&sys, &d16, &[16.0, 24.0, 20.0], &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orbit_distance_recovers_shifts(alpha in 0.0f64..TAU) {
        let (_, wt) = lambda_omega_setup();
        let a = wt.values.clone();
        let b = wt.translate(-alpha).values;
        let (found, dist) = orbit_distance(&a, &b, 16, 2);
        prop_assert!(dist < 1e-9);
        let diff = (found - alpha).rem_euclid(TAU);
        prop_assert!(diff.min(TAU - diff) < 1e-8);
    }
}
