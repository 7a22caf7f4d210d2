use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::SpaceTimeGrid;
use crate::banded::BorderedBanded;
use crate::error::{Error, Result};
use crate::wave_trains::collocation::Collocation;
use crate::wave_trains::ReactionDiffusionSystem;

/// Fourth-order centred second difference, offsets -2..=2, in units of 1/h².
const D2_STENCIL: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
/// Fourth-order centred first difference weights for offsets ±1 and ±2, in units of 1/h.
const D1_NEAR: f64 = 8.0 / 12.0;
const D1_FAR: f64 = -1.0 / 12.0;

/// Discrete operator of the time-periodic boundary-value problem on one grid.
///
/// Unknowns are nodal values `U[(i·N_tau + j)·d + c]` and `ω`. Rows: the collocated
/// equation `ω u_τ - D u_xx - f(u) = 0` at every node, then the phase row
/// `(h/N) Σ (U - U_ref)·∂_τ U_ref = 0`. Neumann conditions at `x = ±L` enter through even
/// ghost reflection, so the centred `u_x` vanishes identically at the ends.
pub(crate) struct DefectOperator<'a> {
    pub sys: &'a ReactionDiffusionSystem,
    pub grid: &'a SpaceTimeGrid,
    pub coll: Collocation,
    ref_dot: Vec<f64>,
    u_ref: Vec<f64>,
}

impl<'a> DefectOperator<'a> {
    pub fn new(sys: &'a ReactionDiffusionSystem, grid: &'a SpaceTimeGrid, u_ref: &[f64]) -> Result<Self> {
        let coll = Collocation::new(grid.n_tau, sys.dim());
        let b = grid.n_tau * sys.dim();
        if u_ref.len() != grid.n_x * b {
            return Err(Error::ShapeMismatch(format!("field has {} values, grid needs {}", u_ref.len(), grid.n_x * b)));
        }
        let mut ref_dot = vec![0.0; u_ref.len()];
        for (src, dst) in u_ref.chunks(b).zip(ref_dot.chunks_mut(b)) {
            coll.apply(&coll.d1, src, dst);
        }
        Ok(Self { sys, grid, coll, ref_dot, u_ref: u_ref.to_vec() })
    }

    pub fn block(&self) -> usize {
        self.grid.n_tau * self.sys.dim()
    }

    pub fn unknowns(&self) -> usize {
        self.grid.n_x * self.block()
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.unknowns() {
            return Err(Error::ShapeMismatch(format!("field has {} values, grid needs {}", u.len(), self.unknowns())));
        }
        Ok(())
    }

    /// `u_xx` at node `i` written into `out`.
    fn dxx(&self, u: &[f64], i: usize, out: &mut [f64]) {
        let b = self.block();
        let h2 = self.grid.h() * self.grid.h();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (o, w) in D2_STENCIL.iter().enumerate() {
            let j = self.grid.reflect(i as isize + o as isize - 2);
            for (dst, src) in out.iter_mut().zip(&u[j * b..(j + 1) * b]) {
                *dst += w * src / h2;
            }
        }
    }

    /// Interior rows only.
    pub fn interior(&self, u: &[f64], omega: f64) -> Result<Vec<f64>> {
        self.check(u)?;
        let (b, d) = (self.block(), self.sys.dim());
        let diff = self.sys.diffusion();
        let mut r = vec![0.0; u.len()];
        r.par_chunks_mut(b).enumerate().for_each(|(i, ri)| {
            let ui = &u[i * b..(i + 1) * b];
            let (mut du, mut uxx, mut f) = (vec![0.0; b], vec![0.0; b], vec![0.0; b]);
            self.coll.apply(&self.coll.d1, ui, &mut du);
            self.dxx(u, i, &mut uxx);
            self.coll.nonlinear(self.sys, ui, &mut f);
            for k in 0..b {
                ri[k] = omega * du[k] - diff[k % d] * uxx[k] - f[k];
            }
        });
        Ok(r)
    }

    pub fn phase_row(&self, u: &[f64]) -> f64 {
        let scale = self.grid.h() / self.grid.n_tau as f64;
        scale * u.iter().zip(&self.u_ref).zip(&self.ref_dot).map(|((a, b), c)| (a - b) * c).sum::<f64>()
    }

    /// Full residual: interior rows followed by the phase row.
    pub fn residual(&self, u: &[f64], omega: f64) -> Result<Vec<f64>> {
        let mut r = self.interior(u, omega)?;
        r.push(self.phase_row(u));
        Ok(r)
    }

    /// Bordered banded Jacobian of [`Self::residual`].
    pub fn jacobian(&self, u: &[f64], omega: f64) -> Result<BorderedBanded> {
        self.check(u)?;
        let (b, d, nx) = (self.block(), self.sys.dim(), self.grid.n_x);
        let h2 = self.grid.h() * self.grid.h();
        let diff = self.sys.diffusion();
        let omega_d1 = self.coll.kron(&self.coll.d1, &vec![omega; d]);
        let blocks: Vec<DMatrix<f64>> = (0..nx)
            .into_par_iter()
            .map(|i| &omega_d1 - self.coll.nonlinear_jacobian(self.sys, &u[i * b..(i + 1) * b]))
            .collect();
        let bw = 3 * b - 1;
        let mut m = BorderedBanded::zeros(nx * b, bw, bw);
        for (i, blk) in blocks.iter().enumerate() {
            for r in 0..b {
                for c in 0..b {
                    let v = blk[(r, c)];
                    if v != 0.0 {
                        m.add(i * b + r, i * b + c, v);
                    }
                }
            }
            for (o, w) in D2_STENCIL.iter().enumerate() {
                let j = self.grid.reflect(i as isize + o as isize - 2);
                for k in 0..b {
                    m.add(i * b + k, j * b + k, -diff[k % d] * w / h2);
                }
            }
        }
        let mut col = vec![0.0; u.len()];
        for (src, dst) in u.chunks(b).zip(col.chunks_mut(b)) {
            self.coll.apply(&self.coll.d1, src, dst);
        }
        let scale = self.grid.h() / self.grid.n_tau as f64;
        let row = self.ref_dot.iter().map(|v| v * scale).collect();
        m.set_border(col, row, 0.0);
        Ok(m)
    }
}

/// Centred fourth-order `u_x` at node `i` using the even ghost extension. Terms are
/// paired so that mirrored neighbours cancel exactly.
pub(crate) fn dx_at(grid: &SpaceTimeGrid, block: usize, u: &[f64], i: usize) -> Vec<f64> {
    let h = grid.h();
    let node = |o: isize| {
        let j = grid.reflect(i as isize + o);
        &u[j * block..(j + 1) * block]
    };
    let (m2, m1, p1, p2) = (node(-2), node(-1), node(1), node(2));
    (0..block).map(|k| (D1_NEAR * (p1[k] - m1[k]) + D1_FAR * (p2[k] - m2[k])) / h).collect()
}

/// Residual rows of `ω u_τ - D u_xx - f(u)` followed by the phase row against `phase_ref`.
pub fn assemble_residual(
    sys: &ReactionDiffusionSystem,
    grid: &SpaceTimeGrid,
    u: &[f64],
    omega: f64,
    phase_ref: &[f64],
) -> Result<Vec<f64>> {
    DefectOperator::new(sys, grid, phase_ref)?.residual(u, omega)
}
