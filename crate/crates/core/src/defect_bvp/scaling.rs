use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use super::newton::TruncatedDefect;
use super::phase::{extract_phase_coordinates, orbit_distance, PhaseCoordinates};
use crate::error::{Error, Result};
use crate::fit::{line_fit, loglog_fit, LogFit};
use crate::wave_trains::WaveTrain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub l: f64,
    pub epsilon_star: f64,
    pub omega: f64,
}

/// Scaling laws measured along a continuation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub omega_d: f64,
    pub family: Vec<FamilyMember>,
    /// `ω(L) > ω_d` for every member.
    pub omega_above_omega_d: bool,
    /// Log-log slope of `ε*` against `L`.
    pub fitted_exponent: f64,
    /// Limit of `ε*·L` from a fit of `ε*·L` against `1/L`.
    pub fitted_constant: f64,
    pub constant_rel_to_half_pi: f64,
    pub constant_rel_to_two_over_pi: f64,
    /// Interior members: `(L, ε*'(L) by centred differences, -constant/L²)`.
    pub derivative_check: Vec<(f64, f64, f64)>,
    /// `(L, sup_x inf_α ‖u_L(x,·) - u_ref(x,·+α)‖_∞)` for all but the reference member.
    pub distance_to_reference: Vec<(f64, f64)>,
    pub distance_exponent: f64,
    /// `(L, max_x |y_ref - y_L|)` for all but the reference member.
    pub y_deviation: Vec<(f64, f64)>,
    pub y_exponent: f64,
    /// Anchor `x_c` of the phase drift `|α_L(L) - α_L(x_c)|`.
    pub drift_anchor: f64,
    pub phase_drift: Vec<(f64, f64)>,
    /// `drift ≈ slope·log L + intercept`.
    pub phase_drift_fit: LogFit,
}

fn check_family(family: &[TruncatedDefect]) -> Result<()> {
    if family.len() < 4 {
        return Err(Error::InsufficientFamily(format!("{} members, need at least 4", family.len())));
    }
    let h = family[0].grid.h();
    for w in family.windows(2) {
        if w[1].grid.l <= w[0].grid.l {
            return Err(Error::InsufficientFamily("members must have strictly increasing L".into()));
        }
    }
    for m in family {
        if (m.grid.h() - h).abs() > 1e-9 * h || m.grid.n_tau != family[0].grid.n_tau {
            return Err(Error::ShapeMismatch("family members must share spacing and N_tau".into()));
        }
    }
    Ok(())
}

/// Node offset of `small` inside `big` (same spacing, both centred at 0).
fn offset(small: &TruncatedDefect, big: &TruncatedDefect) -> usize {
    (big.grid.n_x - small.grid.n_x) / 2
}

/// Verifies the truncation scaling laws on a continuation family sorted by `L`.
/// The largest member stands in for the defect on the whole line.
pub fn verify_scaling(family: &[TruncatedDefect], wt: &WaveTrain) -> Result<ScalingReport> {
    check_family(family)?;
    let omega_d = wt.omega_d;
    let members: Vec<FamilyMember> = family
        .iter()
        .map(|m| FamilyMember { l: m.grid.l, epsilon_star: m.epsilon_star(omega_d), omega: m.omega })
        .collect();
    let omega_above_omega_d = members.iter().all(|m| m.omega > omega_d);
    let fitted_exponent = loglog_fit(&members.iter().map(|m| (m.l, m.epsilon_star)).collect::<Vec<_>>()).slope;
    let fitted_constant =
        line_fit(&members.iter().map(|m| (1.0 / m.l, m.epsilon_star * m.l)).collect::<Vec<_>>()).intercept;
    let derivative_check = members
        .windows(3)
        .map(|w| {
            let fd = (w[2].epsilon_star - w[0].epsilon_star) / (w[2].l - w[0].l);
            // Centred in log L so the dyadic stencil stays second-order accurate.
            let l_mid = (w[0].l * w[2].l).sqrt();
            (l_mid, fd, -fitted_constant / (l_mid * l_mid))
        })
        .collect();

    let reference = family.last().expect("family checked non-empty");
    let ref_phase = extract_phase_coordinates(reference, wt)?;
    let phases: Vec<PhaseCoordinates> =
        family.iter().map(|m| extract_phase_coordinates(m, wt)).collect::<Result<_>>()?;
    let (n, d) = (reference.grid.n_tau, reference.dim);

    let mut distance_to_reference = Vec::new();
    let mut y_deviation = Vec::new();
    for (m, ph) in family.iter().zip(&phases).take(family.len() - 1) {
        let off = offset(m, reference);
        let mut sup = 0.0f64;
        let mut ysup = 0.0f64;
        for i in 0..m.grid.n_x {
            sup = sup.max(orbit_distance(m.slice(i), reference.slice(i + off), n, d).1);
            let dy = (ph.y_l[i] - ref_phase.y_l[i + off]).abs();
            if dy.is_finite() {
                ysup = ysup.max(dy);
            }
        }
        distance_to_reference.push((m.grid.l, sup));
        y_deviation.push((m.grid.l, ysup));
    }
    let distance_exponent = loglog_fit(&distance_to_reference).slope;
    let y_exponent = loglog_fit(&y_deviation).slope;

    let drift_anchor = 0.5 * family[0].grid.l;
    let phase_drift: Vec<(f64, f64)> = family
        .iter()
        .zip(&phases)
        .map(|(m, ph)| {
            let (ia, ib) = (ph.index_of(drift_anchor), m.grid.n_x - 1);
            (m.grid.l, (ph.alpha_l[ib] - ph.alpha_l[ia]).abs())
        })
        .collect();
    if phase_drift.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::FitAmbiguous(drift_anchor));
    }
    let phase_drift_fit = line_fit(&phase_drift.iter().map(|&(l, a)| (l.ln(), a)).collect::<Vec<_>>());

    Ok(ScalingReport {
        omega_d,
        family: members,
        omega_above_omega_d,
        fitted_exponent,
        fitted_constant,
        constant_rel_to_half_pi: fitted_constant / FRAC_PI_2 - 1.0,
        constant_rel_to_two_over_pi: fitted_constant / FRAC_2_PI - 1.0,
        derivative_check,
        distance_to_reference,
        distance_exponent,
        y_deviation,
        y_exponent,
        drift_anchor,
        phase_drift,
        phase_drift_fit,
    })
}
