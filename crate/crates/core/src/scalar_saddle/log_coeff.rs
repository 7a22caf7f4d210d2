use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::SaddleField;
use super::travel::{travel_time_direct, Leg, SaddleWindow};
use crate::error::{Error, Result};

/// Samples of `η(ε)` and `ζ(ε, δ)` in `ε T_+ = η log ε + π/2 + ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCoefficientEstimate {
    pub delta: f64,
    pub eps: Vec<f64>,
    pub eta_samples: Vec<f64>,
    pub zeta_samples: Vec<f64>,
    /// Extrapolated `dη/dε` at `ε = 0`.
    pub slope_at_zero: f64,
}

/// Stencil `ε·2^{-k/2}`, `k = 0..STENCIL`.
const STENCIL: usize = 10;
const MAX_CONDITION: f64 = 1e10;

/// Local fit of `h/s = T(s) - π/(2s)` on `{1, s, s², s³}·{1, log s}` minus `s³ log s`, around `ε`.
/// Returns `(η̂, ζ̂)` at `ε`.
fn local_fit(field: &SaddleField, eps: f64, delta: f64, window: &SaddleWindow) -> Result<(f64, f64)> {
    let mut rows = Vec::with_capacity(STENCIL);
    let mut rhs = Vec::with_capacity(STENCIL);
    let mut h_at_eps = 0.0;
    for k in 0..STENCIL {
        let s = eps * 2f64.powf(-(k as f64) / 2.0);
        let t = travel_time_direct(field, s, delta, Leg::ZeroToPlus, window)?.t;
        let hs = t - FRAC_PI_2 / s;
        if k == 0 {
            h_at_eps = s * hs;
        }
        let l = s.ln();
        rows.push([l, s * l, 1.0, s, s * s, s * s * s]);
        rhs.push(hs);
    }
    let ncols = 6;
    let mut a = DMatrix::from_fn(STENCIL, ncols, |i, j| rows[i][j]);
    let scale: Vec<f64> = (0..ncols).map(|j| a.column(j).norm()).collect();
    for (j, &sc) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / sc);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < MAX_CONDITION) {
        return Err(Error::GridTooCoarse(format!("local regression condition number {cond:.3e} at eps = {eps}")));
    }
    let c = svd.solve(&DVector::from_vec(rhs), 0.0).map_err(|e| Error::GridTooCoarse(e.to_string()))?;
    let eta = eps * (c[0] / scale[0] + eps * c[1] / scale[1]);
    Ok((eta, h_at_eps - eta * eps.ln()))
}

/// Estimates `η` and `ζ` on `eps_grid` at fixed `δ` (leg `ZeroToPlus`).
pub fn extract_log_coefficient(
    field: &SaddleField,
    eps_grid: &[f64],
    delta: f64,
    window: &SaddleWindow,
) -> Result<LogCoefficientEstimate> {
    if eps_grid.len() < 8 {
        return Err(Error::GridTooCoarse(format!("{} points, need at least 8", eps_grid.len())));
    }
    let (lo, hi) = eps_grid.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi / lo < 10.0 {
        return Err(Error::GridTooCoarse(format!("grid spans [{lo}, {hi}], less than a decade")));
    }
    let mut eta = Vec::with_capacity(eps_grid.len());
    let mut zeta = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let (a, b) = local_fit(field, e, delta, window)?;
        eta.push(a);
        zeta.push(b);
    }
    // η/ε is linear in ε near zero; intercept of the fit is dη/dε(0).
    let n = eps_grid.len() as f64;
    let xs = eps_grid;
    let ys: Vec<f64> = eta.iter().zip(xs).map(|(h, e)| h / e).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(LogCoefficientEstimate {
        delta,
        eps: eps_grid.to_vec(),
        eta_samples: eta,
        zeta_samples: zeta,
        slope_at_zero: my - slope * mx,
    })
}
