//! Built-in gauge-invariant systems `A_t = D A_xx + P(|A|²) A` in real form `(Re A, Im A)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave_trains::ReactionDiffusionSystem;

/// `P(s) = (l_r - k_r s + q_r s²) + i (l_i - k_i s + q_i s²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GaugePoly {
    l: (f64, f64),
    k: (f64, f64),
    q: (f64, f64),
}

impl GaugePoly {
    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let (a, b) = (u[0], u[1]);
        let s = a * a + b * b;
        let p = self.l.0 - self.k.0 * s + self.q.0 * s * s;
        let q = self.l.1 - self.k.1 * s + self.q.1 * s * s;
        out[0] = p * a - q * b;
        out[1] = q * a + p * b;
    }

    fn jac(&self, u: &[f64], out: &mut [f64]) {
        let (a, b) = (u[0], u[1]);
        let s = a * a + b * b;
        let p = self.l.0 - self.k.0 * s + self.q.0 * s * s;
        let q = self.l.1 - self.k.1 * s + self.q.1 * s * s;
        let dp = -self.k.0 + 2.0 * self.q.0 * s;
        let dq = -self.k.1 + 2.0 * self.q.1 * s;
        // ∂s/∂a = 2a, ∂s/∂b = 2b
        out[0] = p + 2.0 * a * (a * dp - b * dq);
        out[1] = -q + 2.0 * b * (a * dp - b * dq);
        out[2] = q + 2.0 * a * (a * dq + b * dp);
        out[3] = p + 2.0 * b * (a * dq + b * dp);
    }

    fn system(self, name: String, diffusion: [f64; 2]) -> Result<ReactionDiffusionSystem> {
        let g = self;
        ReactionDiffusionSystem::new(name, diffusion.to_vec(), move |u, o| self.eval(u, o), move |u, o| g.jac(u, o))
    }
}

/// `f(u) = (1 + iω0) u - (1 + iγ)|u|² u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaOmegaParams {
    pub omega0: f64,
    pub gamma: f64,
    pub diffusion: [f64; 2],
}

impl Default for LambdaOmegaParams {
    fn default() -> Self {
        Self { omega0: 1.0, gamma: 0.5, diffusion: [1.0, 1.0] }
    }
}

impl LambdaOmegaParams {
    /// Frequency of the unit-amplitude homogeneous oscillation.
    pub fn omega_d(&self) -> f64 {
        self.omega0 - self.gamma
    }

    /// `ω0 - γ(1 - k²)` for `D = I`.
    pub fn omega_nl(&self, k: f64) -> f64 {
        self.omega0 - self.gamma * (1.0 - k * k)
    }
}

pub fn lambda_omega(params: &LambdaOmegaParams) -> Result<ReactionDiffusionSystem> {
    GaugePoly { l: (1.0, params.omega0), k: (1.0, params.gamma), q: (0.0, 0.0) }
        .system(format!("lambda-omega(omega0={}, gamma={})", params.omega0, params.gamma), params.diffusion)
}

/// `f(A) = (μ + iω0) A - (1 + iγ)|A|² A + (c_r + i c_i)|A|⁴ A` with `c_r < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglQuinticParams {
    pub mu: f64,
    pub omega0: f64,
    pub gamma: f64,
    pub c_r: f64,
    pub c_i: f64,
    pub diffusion: [f64; 2],
}

impl Default for CglQuinticParams {
    /// Parameters selected by the contact-defect sweep recorded in `data/cgl_sweep.txt`.
    fn default() -> Self {
        Self { mu: 1.0, omega0: 0.0, gamma: 3.0, c_r: -0.05, c_i: 1.95, diffusion: [1.0, 1.0] }
    }
}

impl CglQuinticParams {
    /// Squared amplitude `s` of the homogeneous oscillation: the positive root of
    /// `μ - s + c_r s² = 0` reached from small amplitude.
    pub fn amplitude_squared(&self) -> f64 {
        // c_r < 0: μ - s + c_r s² has exactly one positive root.
        let (a, b, c) = (self.c_r, -1.0, self.mu);
        (-b - (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    }

    /// `ω0 - γ s + c_i s²` at the homogeneous amplitude.
    pub fn omega_d(&self) -> f64 {
        let s = self.amplitude_squared();
        self.omega0 - self.gamma * s + self.c_i * s * s
    }
}

pub fn cgl_quintic(params: &CglQuinticParams) -> Result<ReactionDiffusionSystem> {
    if !(params.c_r < 0.0) {
        return Err(Error::ConfigInvalid(format!("quintic damping c_r = {} must be negative", params.c_r)));
    }
    GaugePoly { l: (params.mu, params.omega0), k: (1.0, params.gamma), q: (params.c_r, params.c_i) }.system(
        format!(
            "cgl-quintic(mu={}, omega0={}, gamma={}, c={}+{}i)",
            params.mu, params.omega0, params.gamma, params.c_r, params.c_i
        ),
        params.diffusion,
    )
}
