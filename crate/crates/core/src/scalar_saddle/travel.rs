use serde::{Deserialize, Serialize};

use super::field::SaddleField;
use crate::error::{Error, Result};
use crate::ode::{Ode, OdeOptions, RunControl, Stop};

/// Which part of the passage through the saddle-node is timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Leg {
    /// From `y = -δ` to `y = 0`.
    MinusToZero,
    /// From `y = 0` to `y = δ`.
    ZeroToPlus,
    /// From `y = -δ` to `y = δ`.
    Full,
}

impl Leg {
    pub fn bounds(self, delta: f64) -> (f64, f64) {
        match self {
            Leg::MinusToZero => (-delta, 0.0),
            Leg::ZeroToPlus => (0.0, delta),
            Leg::Full => (-delta, delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TravelMethod {
    DirectOde,
    PartialFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelTimeResult {
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub leg: Leg,
    pub method: TravelMethod,
    pub err_estimate: f64,
}

/// Neighbourhood in which the saddle-node analysis is trusted: `δ ∈ [δ0/2, 2δ0]`, `0 < ε ≤ ε0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleWindow {
    pub delta0: f64,
    pub eps0: f64,
}

impl Default for SaddleWindow {
    fn default() -> Self {
        Self { delta0: 0.5, eps0: 0.1 }
    }
}

impl SaddleWindow {
    pub fn check(&self, epsilon: f64, delta: f64) -> Result<()> {
        if !(delta >= 0.5 * self.delta0 && delta <= 2.0 * self.delta0) {
            return Err(Error::DomainError(format!(
                "delta = {delta} outside [{}, {}]",
                0.5 * self.delta0,
                2.0 * self.delta0
            )));
        }
        if !(epsilon > 0.0 && epsilon <= self.eps0) {
            return Err(Error::DomainError(format!("epsilon = {epsilon} outside (0, {}]", self.eps0)));
        }
        Ok(())
    }
}

/// Location of `y = y_target` along the solution of `y' = F(y, ε²)` from `y(0) = y0`.
#[derive(Debug, Clone)]
pub struct EventHit {
    pub x_hit: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn integrate_to_event(
    field: &SaddleField,
    epsilon: f64,
    y0: f64,
    y_target: f64,
    x_max: f64,
    opts: OdeOptions,
) -> Result<EventHit> {
    if y0 == y_target {
        return Ok(EventHit { x_hit: 0.0, xs: vec![0.0], ys: vec![y0] });
    }
    let omega = epsilon * epsilon;
    let mut ode = Ode::with_options(1, |_x: f64, y: &[f64], dy: &mut [f64]| dy[0] = field.rhs(y[0], omega), opts);
    let ctl = RunControl::default().with_event(move |_x, y| y[0] - y_target).keep_steps();
    let out = ode.run(0.0, &[y0], x_max, ctl)?;
    let (xs, ys) = (out.trajectory.xs, out.trajectory.ys.into_iter().map(|v| v[0]).collect());
    match out.stop {
        Stop::Event { x, .. } => Ok(EventHit { x_hit: x, xs, ys }),
        _ => Err(Error::EventNotReached { target: y_target, x_max }),
    }
}

/// Checks `F(y, ε²) > 0` on a fine sample of `[lo, hi]`.
fn check_monotone(field: &SaddleField, epsilon: f64, lo: f64, hi: f64) -> Result<()> {
    let omega = epsilon * epsilon;
    let n = 2000;
    for k in 0..=n {
        let y = lo + (hi - lo) * k as f64 / n as f64;
        let f = field.rhs(y, omega);
        if f <= 0.0 || !f.is_finite() {
            return Err(Error::NonMonotone(format!("F({y}, {omega}) = {f}")));
        }
    }
    Ok(())
}

fn leg_time(field: &SaddleField, epsilon: f64, lo: f64, hi: f64, opts: OdeOptions) -> Result<f64> {
    // Generous cap: the passage takes about π/ε.
    let x_max = 100.0 * (1.0 / epsilon + 1.0 / (hi - lo));
    Ok(integrate_to_event(field, epsilon, lo, hi, x_max, opts)?.x_hit)
}

/// Travel time by direct integration. The error estimate is the change under a
/// hundredfold looser tolerance.
pub fn travel_time_direct(
    field: &SaddleField,
    epsilon: f64,
    delta: f64,
    leg: Leg,
    window: &SaddleWindow,
) -> Result<TravelTimeResult> {
    travel_time_direct_with(field, epsilon, delta, leg, window, OdeOptions::default())
}

pub fn travel_time_direct_with(
    field: &SaddleField,
    epsilon: f64,
    delta: f64,
    leg: Leg,
    window: &SaddleWindow,
    opts: OdeOptions,
) -> Result<TravelTimeResult> {
    if epsilon == 0.0 {
        return Err(Error::NonMonotone("F vanishes at y = 0 when epsilon = 0".into()));
    }
    window.check(epsilon, delta)?;
    let (lo, hi) = leg.bounds(delta);
    check_monotone(field, epsilon, lo, hi)?;
    let t = leg_time(field, epsilon, lo, hi, opts)?;
    let loose = OdeOptions { rtol: opts.rtol * 100.0, atol: opts.atol * 100.0, ..opts };
    let t_loose = leg_time(field, epsilon, lo, hi, loose)?;
    Ok(TravelTimeResult { t, epsilon, delta, leg, method: TravelMethod::DirectOde, err_estimate: (t - t_loose).abs() })
}
