use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::normal_form::NormalForm;
use super::travel::{Leg, TravelMethod, TravelTimeResult};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Roots of `u³ + (1 + A) u + ε̃ B` and their partial-fraction weights `u/(3u² + 1 + A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicSplit {
    pub eps_tilde: f64,
    pub u1: f64,
    pub u2: (f64, f64),
    pub a1: f64,
    pub a2: (f64, f64),
}

impl CubicSplit {
    /// Coefficient of `log ε̃` in `ε̃ T`.
    pub fn log_coefficient(&self) -> f64 {
        -self.a1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionTime {
    pub result: TravelTimeResult,
    /// Split for the `ZeroToPlus` half (or the mirrored field for `MinusToZero`).
    pub split: CubicSplit,
}

fn split_cubic(eps_tilde: f64, a: f64, b: f64) -> Result<CubicSplit> {
    let p = 1.0 + a;
    let q = eps_tilde * b;
    if p <= 0.0 {
        return Err(Error::RootIsolationFailure(format!("1 + A = {p} is not positive")));
    }
    let mut u1 = -q / p;
    for _ in 0..100 {
        let f = u1 * u1 * u1 + p * u1 + q;
        let step = f / (3.0 * u1 * u1 + p);
        u1 -= step;
        if step.abs() <= 1e-17 * (1.0 + u1.abs()) {
            break;
        }
    }
    // Remaining quadratic u² + u1 u + (u1² + p).
    let disc = u1 * u1 - 4.0 * (u1 * u1 + p);
    if disc >= 0.0 {
        return Err(Error::RootIsolationFailure(format!("three real roots (discriminant {disc})")));
    }
    let u2 = Complex64::new(-0.5 * u1, 0.5 * (-disc).sqrt());
    let a1 = u1 / (3.0 * u1 * u1 + p);
    let a2 = u2 / (3.0 * u2 * u2 + p);
    Ok(CubicSplit { eps_tilde, u1, u2: (u2.re, u2.im), a1, a2: (a2.re, a2.im) })
}

fn zero_to_plus(nf: &NormalForm, epsilon: f64, delta: f64) -> Result<(f64, f64, CubicSplit)> {
    let omega = epsilon * epsilon;
    let n0 = nf.n0(omega);
    if n0 <= 0.0 {
        return Err(Error::RootIsolationFailure(format!("n0(eps^2) = {n0} is not positive")));
    }
    let eps_t = n0.sqrt();
    let (a, b) = (nf.a(omega), nf.b(omega));
    let z_s = nf.invert(0.0, omega)?;
    let d_t = nf.invert(delta, omega)?;
    let split = split_cubic(eps_t, a, b)?;
    let lower = eps_t / d_t;
    if (split.u1 - lower) * (split.u1 - 1.0) <= 0.0 {
        return Err(Error::RootIsolationFailure(format!(
            "real root {} inside the integration range [{lower}, 1]",
            split.u1
        )));
    }
    let (head, head_err) = integrate(|z| 1.0 / nf.rhs(z, omega), z_s, 0.0, 1e-15, 1e-14);
    let (i1, i1_err) = integrate(|s| 1.0 / (1.0 + (1.0 + a) * s * s + eps_t * b * s * s * s), 0.0, 1.0, 1e-16, 1e-15);
    let u2 = Complex64::new(split.u2.0, split.u2.1);
    let a2 = Complex64::new(split.a2.0, split.a2.1);
    let one = Complex64::new(1.0, 0.0);
    let lo = Complex64::new(lower, 0.0);
    let i2 =
        split.a1 * ((1.0 - split.u1) / (lower - split.u1)).ln() + 2.0 * (a2 * ((one - u2).ln() - (lo - u2).ln())).re;
    let t = (i1 + i2) / eps_t + head;
    Ok((t, i1_err / eps_t + head_err, split))
}

/// Travel time from the closed-form partial-fraction integral of the normal form.
pub fn travel_time_partial_fraction(
    nf: &NormalForm,
    epsilon: f64,
    delta: f64,
    leg: Leg,
) -> Result<PartialFractionTime> {
    if !(epsilon > 0.0) {
        return Err(Error::DomainError(format!("epsilon = {epsilon} must be positive")));
    }
    let (t, err, split) = match leg {
        Leg::ZeroToPlus => zero_to_plus(nf, epsilon, delta)?,
        Leg::MinusToZero => zero_to_plus(&nf.mirrored(), epsilon, delta)?,
        Leg::Full => {
            let (tp, ep, split) = zero_to_plus(nf, epsilon, delta)?;
            let (tm, em, _) = zero_to_plus(&nf.mirrored(), epsilon, delta)?;
            (tp + tm, ep + em, split)
        }
    };
    Ok(PartialFractionTime {
        result: TravelTimeResult {
            t,
            epsilon,
            delta,
            leg,
            method: TravelMethod::PartialFraction,
            err_estimate: err.max(1e-15 * t.abs()),
        },
        split,
    })
}
