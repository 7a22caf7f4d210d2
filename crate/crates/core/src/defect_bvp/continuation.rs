use serde::{Deserialize, Serialize};

use super::grid::SpaceTimeGrid;
use super::newton::{newton_solve_with, NewtonOptions, TruncatedDefect};
use crate::error::{Error, Result};
use crate::wave_trains::ReactionDiffusionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    /// Largest ratio `L_new / L_old` attempted in one sub-step.
    pub max_ratio: f64,
    /// Sub-steps shorter than this many grid cells count as a stall.
    pub min_cells: usize,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { max_ratio: 1.5, min_cells: 2, newton: NewtonOptions::default() }
    }
}

/// Re-grids `defect` onto `[-L, L]` at the same spacing. The core `|x| ≤ L_old/2` is kept;
/// the outer part is stretched affinely onto the new outer part, which carries the slowly
/// varying phase tail along. Values are 4-point Lagrange interpolants of the old slices.
pub fn extend_defect(defect: &TruncatedDefect, l: f64) -> Result<(SpaceTimeGrid, Vec<f64>)> {
    let old = &defect.grid;
    let grid = SpaceTimeGrid::with_spacing(l, old.h(), old.n_tau)?;
    let core = 0.5 * old.l.min(grid.l);
    let scale = (old.l - core) / (grid.l - core);
    let b = defect.block();
    let mut u = Vec::with_capacity(grid.n_x * b);
    let mut slice = vec![0.0; b];
    for &x in &grid.x_nodes {
        let xo = if x.abs() <= core { x } else { x.signum() * (core + (x.abs() - core) * scale) };
        interpolate_slice(defect, xo, &mut slice);
        u.extend_from_slice(&slice);
    }
    Ok((grid, u))
}

fn interpolate_slice(defect: &TruncatedDefect, x: f64, out: &mut [f64]) {
    let g = &defect.grid;
    let t = (x + g.l) / g.h();
    let i0 = t.round();
    out.fill(0.0);
    if (t - i0).abs() < 1e-12 {
        out.copy_from_slice(defect.slice(g.reflect(i0 as isize)));
        return;
    }
    let base = t.floor() as isize - 1;
    for k in 0..4isize {
        let mut w = 1.0;
        for m in 0..4isize {
            if m != k {
                w *= (t - (base + m) as f64) / (k - m) as f64;
            }
        }
        for (o, v) in out.iter_mut().zip(defect.slice(g.reflect(base + k))) {
            *o += w * v;
        }
    }
}

fn step_to(
    sys: &ReactionDiffusionSystem,
    from: &TruncatedDefect,
    l: f64,
    omega_guess: f64,
    opts: &NewtonOptions,
) -> Result<TruncatedDefect> {
    let (grid, u0) = extend_defect(from, l)?;
    newton_solve_with(sys, &grid, &u0, omega_guess, &u0, opts)
}

/// One accepted continuation sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub l: f64,
    pub omega: f64,
    pub newton_iters: usize,
    /// Rejected attempts before this step was accepted.
    pub retries: usize,
}

/// Natural continuation in `L` at fixed spacing through the monotone `schedule`
/// (increasing, or decreasing for a backward sweep). Returns the converged member at each
/// scheduled `L`.
pub fn continue_in_l(
    sys: &ReactionDiffusionSystem,
    defect: &TruncatedDefect,
    schedule: &[f64],
    opts: &ContinuationOptions,
) -> Result<Vec<TruncatedDefect>> {
    continue_in_l_logged(sys, defect, schedule, opts).map(|(members, _)| members)
}

/// [`continue_in_l`] together with the log of accepted sub-steps.
pub fn continue_in_l_logged(
    sys: &ReactionDiffusionSystem,
    defect: &TruncatedDefect,
    schedule: &[f64],
    opts: &ContinuationOptions,
) -> Result<(Vec<TruncatedDefect>, Vec<ContinuationStep>)> {
    let up = schedule.windows(2).all(|w| w[1] > w[0]);
    let down = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) || !(opts.max_ratio > 1.0) {
        return Err(Error::ConfigInvalid("L schedule must be strictly monotone and max_ratio > 1".into()));
    }
    let h = defect.grid.h();
    let mut current = defect.clone();
    // (L, ω) of the previous converged state, for secant prediction of ω.
    let mut prev: Option<(f64, f64)> = None;
    let mut out = Vec::with_capacity(schedule.len());
    let mut log = Vec::new();
    for &target in schedule {
        let target = (target / h).round() * h;
        while (current.grid.l - target).abs() > 0.5 * h {
            let l0 = current.grid.l;
            let mut retries = 0;
            let mut next =
                if target > l0 { (l0 * opts.max_ratio).min(target) } else { (l0 / opts.max_ratio).max(target) };
            loop {
                let next_l = (next / h).round() * h;
                if (next_l - l0).abs() < opts.min_cells as f64 * h - 1e-9 {
                    return Err(Error::ContinuationStall { last_good: l0, attempted: next });
                }
                // ω - ω_d ~ 1/L², so extrapolate ω linearly in 1/L².
                let guess = match prev {
                    Some((lp, wp)) if lp != l0 => {
                        let (a, b) = (1.0 / (lp * lp), 1.0 / (l0 * l0));
                        let t = 1.0 / (next_l * next_l);
                        current.omega + (current.omega - wp) * (t - b) / (b - a)
                    }
                    _ => current.omega,
                };
                match step_to(sys, &current, next_l, guess, &opts.newton) {
                    Ok(d) => {
                        log.push(ContinuationStep {
                            l: d.grid.l,
                            omega: d.omega,
                            newton_iters: d.newton_iters,
                            retries,
                        });
                        prev = Some((l0, current.omega));
                        current = d;
                        break;
                    }
                    Err(Error::NewtonDiverged { .. }) | Err(Error::SingularJacobian(_)) => {
                        next = l0 + 0.5 * (next_l - l0);
                        retries += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        out.push(current.clone());
    }
    Ok((out, log))
}
