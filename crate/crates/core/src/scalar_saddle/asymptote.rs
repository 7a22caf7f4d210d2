use serde::{Deserialize, Serialize};

use super::field::SaddleField;
use crate::error::{Error, Result};
use crate::ode::{Ode, OdeOptions, RunControl, Stop};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoteWeight {
    /// `x²`, used when the cubic Taylor coefficient vanishes.
    XSquared,
    /// `x² / log x`.
    XSquaredOverLog,
}

/// Weighted deviation of the `ε = 0` solution from `-1/x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub x_range: (f64, f64),
    pub weight: AsymptoteWeight,
    /// `sup |y + 1/x| · weight(x)` over the range.
    pub sup_deviation: f64,
    pub sup_x2: f64,
    pub sup_x2_over_log: f64,
}

/// Initial state `y(x0) = y0` of the `ε = 0` trajectory.
pub const ASYMPTOTE_START: (f64, f64) = (1.0, -0.5);

pub fn asymptote_check(field: &SaddleField, x_range: (f64, f64)) -> Result<AsymptoteReport> {
    asymptote_check_from(field, x_range, ASYMPTOTE_START)
}

pub fn asymptote_check_from(field: &SaddleField, x_range: (f64, f64), start: (f64, f64)) -> Result<AsymptoteReport> {
    let (a, b) = x_range;
    if !(a > start.0 && b > a && a > 1.0) {
        return Err(Error::DomainError(format!("x range ({a}, {b}) must satisfy x0 < a < b, a > 1")));
    }
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|k| a * (b / a).powf(k as f64 / n as f64)).collect();
    let mut ode = Ode::with_options(
        1,
        |_x: f64, y: &[f64], dy: &mut [f64]| dy[0] = field.rhs(y[0], 0.0),
        OdeOptions { atol: 1e-18, ..OdeOptions::default() },
    );
    let out = ode.run(start.0, &[start.1], b, RunControl::default().with_samples(&xs).keep_steps())?;
    if out.stop != Stop::Reached {
        return Err(Error::EventNotReached { target: b, x_max: b });
    }
    let mut pts: Vec<(f64, f64)> = out.samples.iter().map(|(x, y)| (*x, y[0])).collect();
    pts.extend(
        out.trajectory.xs.iter().zip(&out.trajectory.ys).filter(|(x, _)| **x >= a && **x <= b).map(|(x, y)| (*x, y[0])),
    );
    let (mut s2, mut s2l) = (0.0f64, 0.0f64);
    for (x, y) in pts {
        let d = (y + 1.0 / x).abs() * x * x;
        s2 = s2.max(d);
        s2l = s2l.max(d / x.ln());
    }
    let weight =
        if field.cubic_coefficient() == 0.0 { AsymptoteWeight::XSquared } else { AsymptoteWeight::XSquaredOverLog };
    let sup = match weight {
        AsymptoteWeight::XSquared => s2,
        AsymptoteWeight::XSquaredOverLog => s2l,
    };
    Ok(AsymptoteReport { x_range, weight, sup_deviation: sup, sup_x2: s2, sup_x2_over_log: s2l })
}
