use nalgebra::DMatrix;

use super::system::ReactionDiffusionSystem;
use crate::fourier::{diff_matrix, Dealias};

/// τ-collocation operators for `d`-component nodal data laid out as `[j·d + c]`.
#[derive(Debug, Clone)]
pub struct Collocation {
    pub n: usize,
    pub d: usize,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub dealias: Dealias,
}

impl Collocation {
    /// The fine grid has `3N + 2` nodes, enough to keep a quintic nonlinearity alias-free.
    pub fn new(n: usize, d: usize) -> Self {
        Self { n, d, d1: diff_matrix(n, 1), d2: diff_matrix(n, 2), dealias: Dealias::new(n, 3 * n + 2) }
    }

    /// `(D ⊗ I) u` for a scalar τ-matrix `m`.
    pub fn apply(&self, m: &DMatrix<f64>, u: &[f64], out: &mut [f64]) {
        let d = self.d;
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..m.nrows() {
            for k in 0..m.ncols() {
                let w = m[(j, k)];
                if w != 0.0 {
                    for c in 0..d {
                        out[j * d + c] += w * u[k * d + c];
                    }
                }
            }
        }
    }

    fn upsample(&self, u: &[f64]) -> Vec<f64> {
        let mut fine = vec![0.0; self.dealias.m * self.d];
        self.apply(&self.dealias.up, u, &mut fine);
        fine
    }

    /// Dealiased nodal `f(u)`.
    pub fn nonlinear(&self, sys: &ReactionDiffusionSystem, u: &[f64], out: &mut [f64]) {
        let d = self.d;
        let fine = self.upsample(u);
        let mut f_fine = vec![0.0; fine.len()];
        for i in 0..self.dealias.m {
            sys.f(&fine[i * d..(i + 1) * d], &mut f_fine[i * d..(i + 1) * d]);
        }
        self.apply(&self.dealias.down, &f_fine, out);
    }

    /// Dealiased Jacobian `down · diag f'(up u) · up`, dense `(N d)×(N d)`.
    pub fn nonlinear_jacobian(&self, sys: &ReactionDiffusionSystem, u: &[f64]) -> DMatrix<f64> {
        let (n, d, m) = (self.n, self.d, self.dealias.m);
        let fine = self.upsample(u);
        let mut jac = vec![0.0; d * d];
        // T[i d + r, k d + c] = f'_rc(fine_i) · up[i, k]
        let mut t = DMatrix::zeros(m * d, n * d);
        for i in 0..m {
            sys.jacobian(&fine[i * d..(i + 1) * d], &mut jac);
            for k in 0..n {
                let w = self.dealias.up[(i, k)];
                for r in 0..d {
                    for c in 0..d {
                        t[(i * d + r, k * d + c)] = jac[r * d + c] * w;
                    }
                }
            }
        }
        let mut down = DMatrix::zeros(n * d, m * d);
        for j in 0..n {
            for i in 0..m {
                for r in 0..d {
                    down[(j * d + r, i * d + r)] = self.dealias.down[(j, i)];
                }
            }
        }
        down * t
    }

    /// Kronecker `m ⊗ diag(scale)` as a dense matrix.
    pub fn kron(&self, m: &DMatrix<f64>, scale: &[f64]) -> DMatrix<f64> {
        let d = self.d;
        let mut out = DMatrix::zeros(self.n * d, self.n * d);
        for j in 0..self.n {
            for k in 0..self.n {
                for c in 0..d {
                    out[(j * d + c, k * d + c)] = m[(j, k)] * scale[c];
                }
            }
        }
        out
    }
}
