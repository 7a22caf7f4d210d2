use std::f64::consts::FRAC_PI_2;

use super::grid::SpaceTimeGrid;
use crate::error::{Error, Result};
use crate::wave_trains::WaveTrain;

fn check(wt: &WaveTrain, grid: &SpaceTimeGrid, width: f64) -> Result<()> {
    if !(width > 0.0 && width < grid.l / 2.0) {
        return Err(Error::ConfigInvalid(format!("width {width} must lie in (0, L/2) for L = {}", grid.l)));
    }
    if wt.n_tau != grid.n_tau {
        return Err(Error::ShapeMismatch(format!("wave train has {} nodes, grid {}", wt.n_tau, grid.n_tau)));
    }
    Ok(())
}

/// Phase-jump ansatz `U(x, τ) = P(τ + θ(x))`, `θ(x) = (jump/2)·tanh(x/width)`.
pub fn build_initial_guess(wt: &WaveTrain, grid: &SpaceTimeGrid, jump: f64, width: f64) -> Result<Vec<f64>> {
    check(wt, grid, width)?;
    let eval = wt.evaluator();
    let taus = grid.tau_nodes();
    let mut u = Vec::with_capacity(grid.n_x * grid.n_tau * wt.dim);
    let mut buf = vec![0.0; wt.dim];
    for &x in &grid.x_nodes {
        let theta = 0.5 * jump * (x / width).tanh();
        for &t in &taus {
            eval(t + theta, &mut buf);
            u.extend_from_slice(&buf);
        }
    }
    Ok(u)
}

/// Dark-core ansatz `U = ū + tanh(x/width)·(P(τ + π/2 + θ(x)) - ū)` with `ū` the τ-mean of
/// `P` and the even chirp `θ(x) = -(chirp/2)·log(1 + x²/width²)`.
///
/// When `P(τ + π) - ū = -(P(τ) - ū)` this satisfies `U(-x, τ) = U(x, τ + π)` exactly and
/// connects `P(τ - π/2 + θ)` to `P(τ + π/2 + θ)` through a zero of the oscillation at `x = 0`.
/// The chirp seeds the slowly decaying wavenumber `θ' ≈ -chirp/x` of the far field.
pub fn build_dark_core_guess(wt: &WaveTrain, grid: &SpaceTimeGrid, width: f64, chirp: f64) -> Result<Vec<f64>> {
    check(wt, grid, width)?;
    let d = wt.dim;
    let mean: Vec<f64> = (0..d).map(|c| wt.component(c).iter().sum::<f64>() / wt.n_tau as f64).collect();
    let eval = wt.evaluator();
    let taus = grid.tau_nodes();
    let mut u = Vec::with_capacity(grid.n_x * grid.n_tau * d);
    let mut buf = vec![0.0; d];
    for &x in &grid.x_nodes {
        let s = (x / width).tanh();
        let theta = -0.5 * chirp * (x / width).powi(2).ln_1p();
        for &t in &taus {
            eval(t + FRAC_PI_2 + theta, &mut buf);
            u.extend(buf.iter().zip(&mean).map(|(p, m)| m + s * (p - m)));
        }
    }
    Ok(u)
}
