use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::field::SaddleField;
use super::travel::{travel_time_direct, Leg, SaddleWindow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStarResult {
    pub l: f64,
    pub delta: f64,
    pub epsilon_star: f64,
    /// `T(ε*) - L`.
    pub residual: f64,
    /// `dε*/dL`.
    pub derivative: f64,
}

/// Relative tolerance on `T(ε*) = L`.
const REL_TOL: f64 = 1e-10;

fn time(field: &SaddleField, eps: f64, delta: f64, window: &SaddleWindow) -> Result<f64> {
    Ok(travel_time_direct(field, eps, delta, Leg::MinusToZero, window)?.t)
}

/// Root of `T(ε) = l` starting from a known bracket, polished by secant-Newton.
fn solve_bracketed(
    field: &SaddleField,
    l: f64,
    delta: f64,
    window: &SaddleWindow,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    // T is decreasing in ε: f(lo) > 0 > f(hi). Work in log ε.
    let f = |e: f64| time(field, e, delta, window).map(|t| t - l);
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    let (mut x, mut fx) = (hi, fhi);
    let mut side = 0i8;
    for _ in 0..200 {
        let (llo, lhi) = (lo.ln(), hi.ln());
        let lx = lhi - fhi * (lhi - llo) / (fhi - flo);
        x = lx.exp().clamp(lo, hi);
        fx = f(x)?;
        if fx.abs() <= REL_TOL * l * 1e-2 || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if fx > 0.0 {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
    }
    Ok((x, fx))
}

fn bracket(field: &SaddleField, l: f64, delta: f64, window: &SaddleWindow, guess: f64) -> Result<(f64, f64)> {
    let t_max_eps = time(field, window.eps0, delta, window)?;
    if t_max_eps > l {
        return Err(Error::NoBracket { l, t_at_eps0: t_max_eps });
    }
    let mut hi = guess.min(window.eps0);
    while time(field, hi, delta, window)? > l {
        hi = (hi * 2.0).min(window.eps0);
    }
    let mut lo = hi * 0.5;
    while time(field, lo, delta, window)? <= l {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoBracket { l, t_at_eps0: t_max_eps });
        }
    }
    Ok((lo, hi))
}

fn solve(field: &SaddleField, l: f64, delta: f64, window: &SaddleWindow, guess: f64) -> Result<(f64, f64)> {
    let (lo, hi) = bracket(field, l, delta, window, guess)?;
    solve_bracketed(field, l, delta, window, lo, hi)
}

/// Smallest `ε*` with `T_-(ε*, δ) = L`, and `dε*/dL` by a centred difference.
pub fn solve_epsilon_for_length(
    field: &SaddleField,
    l: f64,
    delta: f64,
    window: &SaddleWindow,
) -> Result<EpsilonStarResult> {
    if !(delta >= 0.5 * window.delta0 && delta <= window.delta0) {
        return Err(Error::DomainError(format!(
            "delta = {delta} outside [{}, {}]",
            0.5 * window.delta0,
            window.delta0
        )));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::DomainError(format!("L = {l} must be positive")));
    }
    let guess = FRAC_PI_2 / l;
    let (eps, res) = solve(field, l, delta, window, guess)?;
    if res.abs() > REL_TOL * l {
        return Err(Error::NewtonDiverged { iterations: 200, residual: res });
    }
    let dl = 1e-3 * l;
    let (ep, _) = solve(field, l + dl, delta, window, eps)?;
    let (em, _) = solve(field, l - dl, delta, window, eps)?;
    Ok(EpsilonStarResult { l, delta, epsilon_star: eps, residual: res, derivative: (ep - em) / (2.0 * dl) })
}
