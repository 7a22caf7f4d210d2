use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::collocation::Collocation;
use super::system::ReactionDiffusionSystem;
use crate::error::{Error, Result};
use crate::fourier::{coefficients, nodes};

/// Homogeneous oscillation `u(t) = P(ω_d t)` with `ω_d P' = f(P)`, stored at `N` τ-nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrain {
    pub n_tau: usize,
    pub dim: usize,
    /// Nodal values `[j·d + c]`.
    pub values: Vec<f64>,
    pub omega_d: f64,
    /// Max-norm collocation residual.
    pub residual: f64,
    pub iterations: usize,
}

impl WaveTrain {
    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.n_tau).map(|j| self.values[j * self.dim + c]).collect()
    }

    /// Coefficients `c_n`, `n = 0..=N/2`, per component; `c_{-n} = conj(c_n)`.
    pub fn fourier_coeffs(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim).map(|c| coefficients(&self.component(c))).collect()
    }

    /// Trigonometric interpolant at `τ`.
    pub fn eval(&self, tau: f64) -> Vec<f64> {
        let half = self.n_tau / 2;
        self.fourier_coeffs()
            .iter()
            .map(|cs| {
                let mut v = cs[0].re + cs[half].re * (half as f64 * tau).cos();
                for (k, c) in cs.iter().enumerate().take(half).skip(1) {
                    v += 2.0 * (c * Complex64::from_polar(1.0, k as f64 * tau)).re;
                }
                v
            })
            .collect()
    }

    /// Evaluator with cached coefficients, for repeated calls.
    pub fn evaluator(&self) -> impl Fn(f64, &mut [f64]) + '_ {
        let coeffs = self.fourier_coeffs();
        let half = self.n_tau / 2;
        move |tau, out| {
            let step = Complex64::from_polar(1.0, tau);
            for (c, cs) in coeffs.iter().enumerate() {
                let mut rot = step;
                let mut v = cs[0].re + cs[half].re * (half as f64 * tau).cos();
                for coef in cs.iter().take(half).skip(1) {
                    v += 2.0 * (coef * rot).re;
                    rot *= step;
                }
                out[c] = v;
            }
        }
    }

    /// `τ ↦ P(τ + α)` resampled on the same nodes.
    pub fn translate(&self, alpha: f64) -> WaveTrain {
        let mut values = Vec::with_capacity(self.values.len());
        for t in nodes(self.n_tau) {
            values.extend(self.eval(t + alpha));
        }
        WaveTrain { values, ..self.clone() }
    }

    /// Interpolant resampled on `n` nodes.
    pub fn resample(&self, n: usize) -> WaveTrain {
        let mut values = Vec::with_capacity(n * self.dim);
        for t in nodes(n) {
            values.extend(self.eval(t));
        }
        WaveTrain { n_tau: n, values, ..self.clone() }
    }

    /// Largest nodal Euclidean norm.
    pub fn amplitude(&self) -> f64 {
        self.values.chunks(self.dim).map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}

pub(crate) struct PeriodicSolution {
    pub values: Vec<f64>,
    pub omega: f64,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 50;

/// Newton on `ω D1 U - k² D D2 U - F(U) = 0` with `⟨U - U_ref, D1 U_ref⟩ = 0`.
pub(crate) fn solve_periodic(
    sys: &ReactionDiffusionSystem,
    coll: &Collocation,
    k: f64,
    u0: &[f64],
    omega0: f64,
    u_ref: &[f64],
) -> Result<PeriodicSolution> {
    let nd = coll.n * coll.d;
    let mut u = u0.to_vec();
    let mut omega = omega0;
    let mut ref_dot = vec![0.0; nd];
    coll.apply(&coll.d1, u_ref, &mut ref_dot);
    let scale = 1.0 / coll.n as f64;
    let diff_k2: Vec<f64> = sys.diffusion().iter().map(|d| d * k * k).collect();

    let residual = |u: &[f64], omega: f64| -> Vec<f64> {
        let (mut du, mut ddu, mut f) = (vec![0.0; nd], vec![0.0; nd], vec![0.0; nd]);
        coll.apply(&coll.d1, u, &mut du);
        coll.apply(&coll.d2, u, &mut ddu);
        coll.nonlinear(sys, u, &mut f);
        let mut r: Vec<f64> = (0..nd).map(|i| omega * du[i] - diff_k2[i % coll.d] * ddu[i] - f[i]).collect();
        r.push(scale * (0..nd).map(|i| (u[i] - u_ref[i]) * ref_dot[i]).sum::<f64>());
        r
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut r = residual(&u, omega);
    let mut rn = norm(&r);
    for it in 0..MAX_ITER {
        if rn < 1e-12 {
            return Ok(PeriodicSolution { values: u, omega, residual: rn, iterations: it });
        }
        let mut jac = DMatrix::zeros(nd + 1, nd + 1);
        let lin = coll.kron(&coll.d1, &vec![omega; coll.d])
            - coll.kron(&coll.d2, &diff_k2)
            - coll.nonlinear_jacobian(sys, &u);
        jac.view_mut((0, 0), (nd, nd)).copy_from(&lin);
        let mut du = vec![0.0; nd];
        coll.apply(&coll.d1, &u, &mut du);
        for i in 0..nd {
            jac[(i, nd)] = du[i];
            jac[(nd, i)] = scale * ref_dot[i];
        }
        let step = jac
            .lu()
            .solve(&DVector::from_vec(r.clone()))
            .ok_or_else(|| Error::SingularJacobian("periodic collocation system".into()))?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
            let trial_omega = omega - lambda * step[nd];
            let rt = residual(&trial, trial_omega);
            let rtn = norm(&rt);
            if rtn < rn || lambda < 1e-3 || rtn < 1e-12 {
                u = trial;
                omega = trial_omega;
                r = rt;
                rn = rtn;
                break;
            }
            lambda *= 0.5;
        }
        if !rn.is_finite() {
            return Err(Error::NewtonDiverged { iterations: it + 1, residual: rn });
        }
    }
    if rn < 1e-10 {
        return Ok(PeriodicSolution { values: u, omega, residual: rn, iterations: MAX_ITER });
    }
    Err(Error::NewtonDiverged { iterations: MAX_ITER, residual: rn })
}

/// Newton–Fourier collocation for the homogeneous oscillation from a periodic guess.
pub fn find_wave_train(
    sys: &ReactionDiffusionSystem,
    guess: impl Fn(f64) -> Vec<f64>,
    n_tau: usize,
) -> Result<WaveTrain> {
    if n_tau < 8 || n_tau % 2 != 0 {
        return Err(Error::ConfigInvalid(format!("N_tau = {n_tau} must be even and at least 8")));
    }
    let d = sys.dim();
    let coll = Collocation::new(n_tau, d);
    let mut u0 = Vec::with_capacity(n_tau * d);
    for t in nodes(n_tau) {
        let g = guess(t);
        if g.len() != d {
            return Err(Error::ShapeMismatch(format!("guess has {} components, system {d}", g.len())));
        }
        u0.extend(g);
    }
    let nd = n_tau * d;
    let (mut du, mut f) = (vec![0.0; nd], vec![0.0; nd]);
    coll.apply(&coll.d1, &u0, &mut du);
    coll.nonlinear(sys, &u0, &mut f);
    let pp: f64 = du.iter().map(|v| v * v).sum();
    if pp == 0.0 {
        return Err(Error::SingularJacobian("constant guess has no phase direction".into()));
    }
    let omega0 = du.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / pp;
    let sol = solve_periodic(sys, &coll, 0.0, &u0, omega0, &u0)?;
    Ok(WaveTrain {
        n_tau,
        dim: d,
        values: sol.values,
        omega_d: sol.omega,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}
