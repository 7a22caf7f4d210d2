use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::collocation::Collocation;
use super::newton::{solve_periodic, WaveTrain};
use super::system::ReactionDiffusionSystem;
use crate::error::{Error, Result};
use crate::ode::{Ode, OdeOptions, RunControl};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearDispersion {
    pub samples: Vec<(f64, f64)>,
    pub omega_nl_pp0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDispersion {
    /// `(ℓ, Re λ, Im λ)`.
    pub samples: Vec<(f64, f64, f64)>,
    pub lambda_lin_pp0: f64,
}

impl LinearDispersion {
    pub fn lambda(&self, i: usize) -> Complex64 {
        Complex64::new(self.samples[i].1, self.samples[i].2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionData {
    pub nonlinear: NonlinearDispersion,
    pub linear: LinearDispersion,
}

/// `h''(0)` from samples of an even function: symmetric second differences at the two
/// smallest positive abscissae, Richardson-extrapolated in `k²`.
fn second_derivative_at_zero(samples: &[(f64, f64)], value0: f64) -> Result<f64> {
    let lookup = |k: f64| samples.iter().find(|s| (s.0 - k).abs() <= 1e-14 * (1.0 + k.abs())).map(|s| s.1);
    let mut pos: Vec<f64> = samples.iter().map(|s| s.0).filter(|&k| k > 0.0 && lookup(-k).is_some()).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    let d = |k: f64| (lookup(k).unwrap() - 2.0 * value0 + lookup(-k).unwrap()) / (k * k);
    match pos.as_slice() {
        [] => Err(Error::GridTooCoarse("grid needs a symmetric pair ±k".into())),
        [k] => Ok(d(*k)),
        [k1, k2, ..] => {
            let (a, b) = (k1 * k1, k2 * k2);
            Ok((b * d(*k1) - a * d(*k2)) / (b - a))
        }
    }
}

/// Order of continuation: outward from the smallest `|k|`, each sign separately.
fn outward(grid: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&a, &b| grid[a].abs().total_cmp(&grid[b].abs()).then(grid[a].total_cmp(&grid[b])));
    idx
}

/// `ω_nl(k)` from `ω P' = k² D P'' + f(P)` continued from the homogeneous oscillation.
pub fn nonlinear_dispersion(
    sys: &ReactionDiffusionSystem,
    wt: &WaveTrain,
    k_grid: &[f64],
) -> Result<NonlinearDispersion> {
    let coll = Collocation::new(wt.n_tau, wt.dim);
    let mut samples = vec![(0.0f64, 0.0f64); k_grid.len()];
    // Last converged state on each side.
    let mut last: [(Vec<f64>, f64); 2] = [(wt.values.clone(), wt.omega_d), (wt.values.clone(), wt.omega_d)];
    for i in outward(k_grid) {
        let k = k_grid[i];
        let side = usize::from(k < 0.0);
        let (u0, w0) = &last[side];
        let sol = solve_periodic(sys, &coll, k, u0, *w0, &wt.values).map_err(|_| Error::ContinuationStall {
            last_good: samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max),
            attempted: k,
        })?;
        samples[i] = (k, sol.omega);
        last[side] = (sol.values, sol.omega);
        if k == 0.0 {
            last[1 - side] = last[side].clone();
        }
    }
    let w0 = samples.iter().find(|s| s.0 == 0.0).map_or(wt.omega_d, |s| s.1);
    let pp = second_derivative_at_zero(&samples, w0)?;
    Ok(NonlinearDispersion { samples, omega_nl_pp0: pp })
}

/// Floquet exponents `ω Log(μ)/(2π)` of `v_τ = (1/ω)(-ℓ² D + f'(P(τ))) v`.
pub fn floquet_exponents(sys: &ReactionDiffusionSystem, wt: &WaveTrain, l: f64) -> Result<Vec<Complex64>> {
    let d = wt.dim;
    let eval = wt.evaluator();
    let diff: Vec<f64> = sys.diffusion().to_vec();
    let omega = wt.omega_d;
    let mut u = vec![0.0; d];
    let mut jac = vec![0.0; d * d];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        eval(t, &mut u);
        sys.jacobian(&u, &mut jac);
        for c in 0..d {
            jac[c * d + c] -= l * l * diff[c];
        }
        // Φ stored row-major: y[r d + c]
        for r in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for m in 0..d {
                    s += jac[r * d + m] * y[m * d + c];
                }
                dy[r * d + c] = s / omega;
            }
        }
    };
    let mut ode = Ode::with_options(d * d, rhs, OdeOptions { atol: 1e-14, ..OdeOptions::default() });
    let id: Vec<f64> = (0..d * d).map(|i| if i / d == i % d { 1.0 } else { 0.0 }).collect();
    let out = ode.run(0.0, &id, TAU, RunControl::default())?;
    let (_, phi) = out.final_state();
    let m = DMatrix::from_row_slice(d, d, phi);
    Ok(m.complex_eigenvalues().iter().map(|mu| omega * mu.ln() / TAU).collect())
}

const CROSSING_TOL: f64 = 1e-6;

/// Tracks the Floquet branch with `λ(0) = 0` along `l_grid`.
pub fn linear_dispersion(sys: &ReactionDiffusionSystem, wt: &WaveTrain, l_grid: &[f64]) -> Result<LinearDispersion> {
    let mut samples = vec![(0.0, 0.0, 0.0); l_grid.len()];
    let mut last = [Complex64::new(0.0, 0.0); 2];
    for i in outward(l_grid) {
        let l = l_grid[i];
        let side = usize::from(l < 0.0);
        let ex = floquet_exponents(sys, wt, l)?;
        let mut order: Vec<usize> = (0..ex.len()).collect();
        order.sort_by(|&a, &b| (ex[a] - last[side]).norm().total_cmp(&(ex[b] - last[side]).norm()));
        let pick = ex[order[0]];
        if order.len() > 1 && (ex[order[1]] - pick).norm() < CROSSING_TOL {
            return Err(Error::BranchCrossing(l));
        }
        samples[i] = (l, pick.re, pick.im);
        last[side] = pick;
        if l == 0.0 {
            last[1 - side] = pick;
        }
    }
    let re: Vec<(f64, f64)> = samples.iter().map(|s| (s.0, s.1)).collect();
    let l0 = samples.iter().find(|s| s.0 == 0.0).map_or(0.0, |s| s.1);
    let pp = second_derivative_at_zero(&re, l0)?;
    Ok(LinearDispersion { samples, lambda_lin_pp0: pp })
}

pub fn dispersion(
    sys: &ReactionDiffusionSystem,
    wt: &WaveTrain,
    k_grid: &[f64],
    l_grid: &[f64],
) -> Result<DispersionData> {
    Ok(DispersionData {
        nonlinear: nonlinear_dispersion(sys, wt, k_grid)?,
        linear: linear_dispersion(sys, wt, l_grid)?,
    })
}
