use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type VecFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// `u_t = D u_xx + f(u)` with diagonal `D`. The Jacobian is row-major `d×d`.
#[derive(Clone)]
pub struct ReactionDiffusionSystem {
    name: String,
    diffusion: Vec<f64>,
    f: VecFn,
    jac: VecFn,
}

impl fmt::Debug for ReactionDiffusionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionDiffusionSystem").field("name", &self.name).field("diffusion", &self.diffusion).finish()
    }
}

/// Deterministic probe points in `[-1.5, 1.5]^d` for consistency checks.
pub(crate) fn probe_points(d: usize, count: usize) -> Vec<Vec<f64>> {
    // Additive recurrence with irrational increments.
    let alphas: Vec<f64> = (0..d).map(|c| ((c + 2) as f64).sqrt().fract()).collect();
    (1..=count).map(|k| alphas.iter().map(|a| 3.0 * (k as f64 * a).fract() - 1.5).collect()).collect()
}

impl ReactionDiffusionSystem {
    /// Checks `D > 0`, `d >= 2` and the Jacobian against central differences at probe points.
    pub fn new(
        name: impl Into<String>,
        diffusion: Vec<f64>,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jac: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = diffusion.len();
        if d < 2 {
            return Err(Error::ConfigInvalid(format!("dimension {d} < 2")));
        }
        if diffusion.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::ConfigInvalid(format!("diffusion {diffusion:?} must be positive")));
        }
        let sys = Self { name: name.into(), diffusion, f: Arc::new(f), jac: Arc::new(jac) };
        let err = sys.jacobian_fd_error(8);
        if err > 1e-6 {
            return Err(Error::ConfigInvalid(format!("Jacobian disagrees with finite differences by {err:.3e}")));
        }
        Ok(sys)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.diffusion.len()
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    pub fn f(&self, u: &[f64], out: &mut [f64]) {
        (self.f)(u, out)
    }

    pub fn jacobian(&self, u: &[f64], out: &mut [f64]) {
        (self.jac)(u, out)
    }

    /// Largest relative deviation of the Jacobian from central differences.
    pub fn jacobian_fd_error(&self, count: usize) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        let (mut fp, mut fm, mut j) = (vec![0.0; d], vec![0.0; d], vec![0.0; d * d]);
        for u in probe_points(d, count) {
            self.jacobian(&u, &mut j);
            for c in 0..d {
                let h = 1e-6 * (1.0 + u[c].abs());
                let (mut up, mut um) = (u.clone(), u.clone());
                up[c] += h;
                um[c] -= h;
                self.f(&up, &mut fp);
                self.f(&um, &mut fm);
                for r in 0..d {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    worst = worst.max((fd - j[r * d + c]).abs() / (1.0 + j[r * d + c].abs()));
                }
            }
        }
        worst
    }
}
