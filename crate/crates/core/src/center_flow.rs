//! Reduced flow `α' = y`, `y' = ω* + y² + g(y, ω*)` on the center manifold.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
pub use crate::fit::LogFit;
use crate::ode::{Ode, OdeOptions, RunControl, Stop};
use crate::scalar_saddle::SaddleField;

#[derive(Debug, Clone)]
pub struct CenterTrajectory {
    pub xs: Vec<f64>,
    /// Unreduced phase.
    pub alpha_lift: Vec<f64>,
    pub y: Vec<f64>,
    pub omega_star: f64,
    pub field: SaddleField,
}

impl CenterTrajectory {
    /// `(x, α mod 2π, y)`.
    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        self.xs.iter().zip(&self.alpha_lift).zip(&self.y).map(|((&x, &a), &y)| (x, a.rem_euclid(TAU), y)).collect()
    }

    /// `α(x_last) - α(x_first)` on the lift.
    pub fn drift(&self) -> f64 {
        self.alpha_lift.last().unwrap() - self.alpha_lift[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageReport {
    pub eps: f64,
    pub delta0: f64,
    /// Time from `y = -δ0` to `y = 0`.
    pub l_of_eps: f64,
    /// `α(0) - α(-L)`.
    pub alpha_drift: f64,
}

fn center_ode(field: &SaddleField, omega: f64) -> Ode<impl FnMut(f64, &[f64], &mut [f64]) + '_> {
    Ode::with_options(
        2,
        move |_x: f64, s: &[f64], ds: &mut [f64]| {
            ds[0] = s[1];
            ds[1] = field.rhs(s[1], omega);
        },
        OdeOptions { atol: 1e-18, ..OdeOptions::default() },
    )
}

/// Trajectory sampled at `n_samples` equispaced points of `span` (either direction).
/// `Blowup` if `|y|` leaves `[-2δ0, 2δ0]`.
pub fn integrate_center(
    field: &SaddleField,
    omega_star: f64,
    start: (f64, f64),
    span: (f64, f64),
    delta0: f64,
    n_samples: usize,
) -> Result<CenterTrajectory> {
    let bound = 2.0 * delta0;
    if start.1.abs() > bound {
        return Err(Error::DomainError(format!("start y = {} outside [-{bound}, {bound}]", start.1)));
    }
    let n = n_samples.max(2);
    let xs: Vec<f64> = (0..n).map(|k| span.0 + (span.1 - span.0) * k as f64 / (n - 1) as f64).collect();
    let mut ode = center_ode(field, omega_star);
    let ctl = RunControl::default().with_samples(&xs).with_guard(move |_x, s| s[1].abs() <= bound);
    let out = ode.run(span.0, &[start.0, start.1], span.1, ctl)?;
    if let Stop::Halted { x, y } = out.stop {
        return Err(Error::Blowup { x, y: y[1] });
    }
    Ok(CenterTrajectory {
        xs: out.samples.iter().map(|s| s.0).collect(),
        alpha_lift: out.samples.iter().map(|s| s.1[0]).collect(),
        y: out.samples.iter().map(|s| s.1[1]).collect(),
        omega_star,
        field: field.clone(),
    })
}

/// First `x` (in the direction of `x_end`) where `y = y_level`; returns `(x, α lift)`.
pub fn center_crossing(
    field: &SaddleField,
    omega_star: f64,
    start: (f64, f64),
    y_level: f64,
    x_end: f64,
    delta0: f64,
) -> Result<(f64, f64)> {
    let bound = 2.0 * delta0;
    let mut ode = center_ode(field, omega_star);
    let ctl =
        RunControl::default().with_event(move |_x, s| s[1] - y_level).with_guard(move |_x, s| s[1].abs() <= bound);
    let out = ode.run(0.0, &[start.0, start.1], x_end, ctl)?;
    match out.stop {
        Stop::Event { x, y } => Ok((x, y[0])),
        Stop::Halted { x, y } => Err(Error::Blowup { x, y: y[1] }),
        Stop::Reached => Err(Error::EventNotReached { target: y_level, x_max: x_end }),
    }
}

/// Solution with `y(0) = 0`, `y(-L) = -δ0`, built backward from `x = 0`.
pub fn passage_report(field: &SaddleField, eps: f64, delta0: f64) -> Result<PassageReport> {
    if !(eps > 0.0) {
        return Err(Error::DomainError(format!("eps = {eps} must be positive")));
    }
    let x_max = 100.0 * (1.0 / eps + 1.0 / delta0);
    let (x, alpha) = center_crossing(field, eps * eps, (0.0, 0.0), -delta0, -x_max, delta0)?;
    Ok(PassageReport { eps, delta0, l_of_eps: -x, alpha_drift: -alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    /// `sup_{|x|<1/3} |y(x) - ε²x| / (ε⁴x²)`.
    pub err_near_zero: f64,
    /// `sup_{|x|<1} |y(-L+x) + δ0 - δ0²x| / (ε|x| + δ0³x² + δ0³|x|)`.
    pub err_near_boundary: f64,
}

/// Samples of the scalar flow; stops quietly once `|y| > bound`.
fn sampled_scalar(field: &SaddleField, omega: f64, y0: f64, xs: &[f64], bound: f64) -> Result<Vec<(f64, f64)>> {
    let mut ode = Ode::with_options(
        1,
        |_x: f64, y: &[f64], dy: &mut [f64]| dy[0] = field.rhs(y[0], omega),
        OdeOptions { atol: 1e-20, ..OdeOptions::default() },
    );
    let end = *xs.last().unwrap();
    let ctl = RunControl::default().with_samples(xs).with_guard(move |_x, y| y[0].abs() <= bound);
    let out = ode.run(0.0, &[y0], end, ctl)?;
    Ok(out.samples.into_iter().map(|(x, y)| (x, y[0])).collect())
}

fn two_sided(field: &SaddleField, omega: f64, y0: f64, radius: f64, floor: f64, bound: f64) -> Result<Vec<(f64, f64)>> {
    let n = 200;
    let right: Vec<f64> = (0..=n).map(|k| floor + (radius - floor) * k as f64 / n as f64).collect();
    let left: Vec<f64> = right.iter().map(|x| -x).collect();
    let mut pts = sampled_scalar(field, omega, y0, &right, bound)?;
    pts.extend(sampled_scalar(field, omega, y0, &left, bound)?);
    Ok(pts)
}

/// Checks both local expansions of the boundary-anchored solution. For `eps = 0`
/// only the boundary expansion is meaningful and `err_near_zero` is 0. Samples
/// with `|y| > 2δ0` are dropped.
pub fn local_expansion_check(field: &SaddleField, eps: f64, delta0: f64) -> Result<LocalExpansion> {
    let omega = eps * eps;
    let mut near_zero = 0.0f64;
    if eps > 0.0 {
        for (x, y) in two_sided(field, omega, 0.0, 1.0 / 3.0 - 1e-9, 1e-2, 2.0 * delta0)? {
            near_zero = near_zero.max((y - omega * x).abs() / (omega * omega * x * x));
        }
    }
    // The boundary state is y(-L) = -δ0; shift the origin there.
    let mut near_boundary = 0.0f64;
    for (x, y) in two_sided(field, omega, -delta0, 1.0 - 1e-9, 1e-3, 2.0 * delta0)? {
        let bound = eps * x.abs() + delta0.powi(3) * (x * x + x.abs());
        near_boundary = near_boundary.max((y + delta0 - delta0 * delta0 * x).abs() / bound);
    }
    Ok(LocalExpansion { err_near_zero: near_zero, err_near_boundary: near_boundary })
}

/// Least squares `α(x) ≈ slope·log x + intercept` for the `ε = 0` flow started at `y(x0) = -1/x0`.
pub fn phase_drift_log_check(field: &SaddleField, x_range: (f64, f64)) -> Result<LogFit> {
    let (a, b) = x_range;
    if !(a > 0.0 && b > a) {
        return Err(Error::DomainError(format!("x range ({a}, {b}) must satisfy 0 < a < b")));
    }
    let n = 200;
    let xs: Vec<f64> = (0..=n).map(|k| a * (b / a).powf(k as f64 / n as f64)).collect();
    let mut ode = center_ode(field, 0.0);
    let out = ode.run(a, &[0.0, -1.0 / a], b, RunControl::default().with_samples(&xs))?;
    let pts: Vec<(f64, f64)> = out.samples.iter().map(|(x, s)| (x.ln(), s[0])).collect();
    Ok(line_fit(&pts))
}
