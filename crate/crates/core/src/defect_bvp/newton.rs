use serde::{Deserialize, Serialize};

use super::grid::SpaceTimeGrid;
use super::residual::{dx_at, DefectOperator};
use crate::banded::BorderedLu;
use crate::error::{Error, Result};
use crate::fourier::interp_matrix;
use crate::wave_trains::ReactionDiffusionSystem;

/// Converged solution of the truncated problem on `[-L, L] × S¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDefect {
    pub grid: SpaceTimeGrid,
    pub dim: usize,
    /// Nodal values `[(i·N_tau + j)·d + c]`.
    pub u: Vec<f64>,
    pub omega: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
    /// Max-norm residual before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    /// Estimate of the smallest singular value of the bordered Jacobian at the solution.
    pub sigma_min: f64,
}

impl TruncatedDefect {
    pub fn block(&self) -> usize {
        self.grid.n_tau * self.dim
    }

    /// Values at the `i`-th x-node, `[j·d + c]`.
    pub fn slice(&self, i: usize) -> &[f64] {
        let b = self.block();
        &self.u[i * b..(i + 1) * b]
    }

    /// Component `c` at x-node `i` over the τ-nodes.
    pub fn component(&self, i: usize, c: usize) -> Vec<f64> {
        self.slice(i).chunks(self.dim).map(|v| v[c]).collect()
    }

    /// `ε* = sqrt(|ω - ω_d|)`.
    pub fn epsilon_star(&self, omega_d: f64) -> f64 {
        (self.omega - omega_d).abs().sqrt()
    }

    /// Largest centred `|u_x|` at the two boundary nodes.
    pub fn boundary_dx(&self) -> f64 {
        let b = self.block();
        [0, self.grid.n_x - 1].iter().flat_map(|&i| dx_at(&self.grid, b, &self.u, i)).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `u(x, τ + α)` by trigonometric interpolation at every x-node.
    pub fn translate(&self, alpha: f64) -> TruncatedDefect {
        let n = self.grid.n_tau;
        let targets: Vec<f64> = self.grid.tau_nodes().iter().map(|t| t + alpha).collect();
        let m = interp_matrix(n, &targets);
        let mut u = vec![0.0; self.u.len()];
        let (b, d) = (self.block(), self.dim);
        for i in 0..self.grid.n_x {
            for j in 0..n {
                for k in 0..n {
                    let w = m[(j, k)];
                    for c in 0..d {
                        u[i * b + j * d + c] += w * self.u[i * b + k * d + c];
                    }
                }
            }
        }
        TruncatedDefect { u, ..self.clone() }
    }

    /// True when the tail of the residual history contracts quadratically:
    /// some step from `r ≤ 1e-2` lands below `max(K r², floor)`, and no tail step
    /// above the floor is slower than that.
    pub fn quadratic_tail(&self) -> bool {
        quadratic_tail(&self.residual_history, 1e3, 1e-11)
    }
}

pub(crate) fn quadratic_tail(history: &[f64], k: f64, floor: f64) -> bool {
    let mut seen = false;
    for w in history.windows(2) {
        let (r0, r1) = (w[0], w[1]);
        if r0 > 1e-2 || r0 <= floor {
            continue;
        }
        if r1 > (k * r0 * r0).max(floor) {
            return false;
        }
        seen = true;
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30, min_damping: 1.0 / 64.0 }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Smallest singular value of the factored matrix by inverse iteration on `MᵀM`.
pub(crate) fn sigma_min(lu: &BorderedLu, n: usize, iters: usize) -> f64 {
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).fract()).collect();
    let mut est = f64::NAN;
    for _ in 0..iters {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let w = lu.solve_transpose(&lu.solve(&v));
        // ‖(MᵀM)⁻¹ v‖ → 1/σ_min²
        est = 1.0 / w.iter().map(|x| x * x).sum::<f64>().sqrt().sqrt();
        v = w;
    }
    est
}

/// Newton's method on `(U, ω)` with the phase row anchored at `u0`.
pub fn newton_solve(
    sys: &ReactionDiffusionSystem,
    grid: &SpaceTimeGrid,
    u0: &[f64],
    omega0: f64,
) -> Result<TruncatedDefect> {
    newton_solve_with(sys, grid, u0, omega0, u0, &NewtonOptions::default())
}

/// [`newton_solve`] with an explicit phase reference and options.
pub fn newton_solve_with(
    sys: &ReactionDiffusionSystem,
    grid: &SpaceTimeGrid,
    u0: &[f64],
    omega0: f64,
    phase_ref: &[f64],
    opts: &NewtonOptions,
) -> Result<TruncatedDefect> {
    let op = DefectOperator::new(sys, grid, phase_ref)?;
    if u0.len() != op.unknowns() {
        return Err(Error::ShapeMismatch(format!("guess has {} values, grid needs {}", u0.len(), op.unknowns())));
    }
    let n = op.unknowns();
    let mut u = u0.to_vec();
    let mut omega = omega0;
    let mut r = op.residual(&u, omega)?;
    let mut rn = max_norm(&r);
    let mut history = vec![rn];
    for it in 0..=opts.max_iter {
        if rn <= opts.tol {
            let lu = op.jacobian(&u, omega)?.factor()?;
            let sigma = sigma_min(&lu, n + 1, 6);
            return Ok(TruncatedDefect {
                grid: grid.clone(),
                dim: sys.dim(),
                u,
                omega,
                residual_norm: rn,
                newton_iters: it,
                residual_history: history,
                sigma_min: sigma,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let jac = op.jacobian(&u, omega)?;
        let lu = jac.factor()?;
        let mut step = lu.solve(&r);
        // One pass of iterative refinement against the unfactored matrix.
        let back = jac.matvec(&step);
        let corr: Vec<f64> = r.iter().zip(&back).map(|(a, b)| a - b).collect();
        for (s, c) in step.iter_mut().zip(lu.solve(&corr)) {
            *s += c;
        }
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            let trial_omega = omega - lambda * step[n];
            let rt = op.residual(&trial, trial_omega)?;
            let rtn = max_norm(&rt);
            if rtn.is_finite() && (rtn < rn || rtn <= opts.tol) {
                u = trial;
                omega = trial_omega;
                r = rt;
                rn = rtn;
                break;
            }
            lambda *= 0.5;
            if lambda < opts.min_damping {
                return Err(Error::NewtonDiverged { iterations: it + 1, residual: rn });
            }
        }
        history.push(rn);
    }
    Err(Error::NewtonDiverged { iterations: opts.max_iter, residual: rn })
}
