use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::collocation::Collocation;
use super::dispersion::{linear_dispersion, nonlinear_dispersion};
use super::newton::WaveTrain;
use super::system::{probe_points, ReactionDiffusionSystem};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Eigenvalues of the spatial linearization with `|ν| < ZERO_TOL`.
    pub zero_multiplicity: usize,
    /// Nullity of the spatial linearization itself.
    pub geometric_multiplicity: usize,
    /// Nullity of its square.
    pub square_nullity: usize,
    pub spectral_gap: f64,
    /// Gap on the operator built from `2N` nodes.
    pub spectral_gap_refined: f64,
    pub omega_nl_pp0: f64,
    pub lambda_lin_pp0: f64,
    pub omega_nl_pp0_nonzero: bool,
    pub lambda_lin_pp0_nonzero: bool,
    /// `‖G(Rp) + R G(p)‖ / ‖G(p)‖` for `R0` and `Rπ`.
    pub reverser_defects: (f64, f64),
    pub reversers_verified: bool,
    pub h2_pass: bool,
    pub h5_pass: bool,
    pub inconclusive: Vec<String>,
}

const ZERO_TOL: f64 = 1e-4;
const NONZERO_TOL: f64 = 1e-3;

/// `[[0, I], [D⁻¹(ω D1 - F'(P)), 0]]` on `(u, v)` nodal data.
pub fn spatial_operator(sys: &ReactionDiffusionSystem, wt: &WaveTrain) -> DMatrix<f64> {
    let coll = Collocation::new(wt.n_tau, wt.dim);
    let nd = wt.n_tau * wt.dim;
    let inv_d: Vec<f64> = sys.diffusion().iter().map(|v| 1.0 / v).collect();
    let lin = coll.kron(&coll.d1, &vec![wt.omega_d; wt.dim]) - coll.nonlinear_jacobian(sys, &wt.values);
    let mut a = DMatrix::zeros(2 * nd, 2 * nd);
    for i in 0..nd {
        a[(i, nd + i)] = 1.0;
        for j in 0..nd {
            a[(nd + i, j)] = inv_d[i % wt.dim] * lin[(i, j)];
        }
    }
    a
}

struct Spectrum {
    zeros: usize,
    gap: f64,
    nullity: usize,
    square_nullity: usize,
}

fn spectrum(a: &DMatrix<f64>) -> Spectrum {
    let ev = a.complex_eigenvalues();
    let zeros = ev.iter().filter(|v| v.norm() < ZERO_TOL).count();
    let gap = ev.iter().filter(|v| v.norm() >= ZERO_TOL).map(|v| v.re.abs()).fold(f64::INFINITY, f64::min);
    let nullity = |m: &DMatrix<f64>| {
        let sv = m.singular_values();
        let tol = 1e-9 * sv.max();
        sv.iter().filter(|&&s| s < tol).count()
    };
    Spectrum { zeros, gap, nullity: nullity(a), square_nullity: nullity(&(a * a)) }
}

/// Spatial vector field `G(u, v) = (v, D⁻¹(ω u_τ - F(u)))`.
fn spatial_field(sys: &ReactionDiffusionSystem, coll: &Collocation, omega: f64, p: &[f64]) -> Vec<f64> {
    let nd = coll.n * coll.d;
    let (u, v) = p.split_at(nd);
    let (mut du, mut f) = (vec![0.0; nd], vec![0.0; nd]);
    coll.apply(&coll.d1, u, &mut du);
    coll.nonlinear(sys, u, &mut f);
    let mut out = v.to_vec();
    out.extend((0..nd).map(|i| (omega * du[i] - f[i]) / sys.diffusion()[i % coll.d]));
    out
}

/// `(u, v)(τ) ↦ (u, -v)(τ + shift·2π/N)`.
fn reverse(p: &[f64], n: usize, d: usize, shift: usize) -> Vec<f64> {
    let nd = n * d;
    let mut out = vec![0.0; 2 * nd];
    for j in 0..n {
        let src = (j + shift) % n;
        for c in 0..d {
            out[j * d + c] = p[src * d + c];
            out[nd + j * d + c] = -p[nd + src * d + c];
        }
    }
    out
}

/// Relative anti-commutation defects of `R0` and `Rπ` with `G` at deterministic probe states.
pub fn reverser_defects(sys: &ReactionDiffusionSystem, wt: &WaveTrain) -> (f64, f64) {
    let coll = Collocation::new(wt.n_tau, wt.dim);
    let nd = wt.n_tau * wt.dim;
    let mut worst = (0.0f64, 0.0f64);
    for probe in probe_points(2 * nd, 4) {
        let p: Vec<f64> = probe.iter().zip(wt.values.iter().chain(&vec![0.0; nd])).map(|(a, b)| b + 0.3 * a).collect();
        let g = spatial_field(sys, &coll, wt.omega_d, &p);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (shift, slot) in [(0, &mut worst.0), (wt.n_tau / 2, &mut worst.1)] {
            let rg = reverse(&g, wt.n_tau, wt.dim, shift);
            let grp = spatial_field(sys, &coll, wt.omega_d, &reverse(&p, wt.n_tau, wt.dim, shift));
            let e = grp.iter().zip(&rg).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt() / gnorm;
            *slot = slot.max(e);
        }
    }
    worst
}

/// Dispersion grids used by the hypothesis check.
pub const DEFAULT_K_GRID: [f64; 5] = [-0.1, -0.05, 0.0, 0.05, 0.1];

pub fn check_hypotheses(sys: &ReactionDiffusionSystem, wt: &WaveTrain) -> Result<HypothesisReport> {
    let mut inconclusive = Vec::new();
    let coarse = spectrum(&spatial_operator(sys, wt));
    let fine = spectrum(&spatial_operator(sys, &wt.resample(2 * wt.n_tau)));
    if (fine.gap - coarse.gap).abs() > 0.05 * coarse.gap || fine.zeros != coarse.zeros {
        inconclusive.push(format!(
            "spectrum changes under N refinement: gap {} -> {}, zeros {} -> {}",
            coarse.gap, fine.gap, coarse.zeros, fine.zeros
        ));
    }
    let omega_pp = match nonlinear_dispersion(sys, wt, &DEFAULT_K_GRID) {
        Ok(d) => d.omega_nl_pp0,
        Err(e) => {
            inconclusive.push(format!("nonlinear dispersion: {e}"));
            f64::NAN
        }
    };
    let lambda_pp = match linear_dispersion(sys, wt, &DEFAULT_K_GRID) {
        Ok(d) => d.lambda_lin_pp0,
        Err(e) => {
            inconclusive.push(format!("linear dispersion: {e}"));
            f64::NAN
        }
    };
    let defects = reverser_defects(sys, wt);
    let reversers_verified = defects.0 < 1e-10 && defects.1 < 1e-10;
    let omega_nl_pp0_nonzero = omega_pp.abs() > NONZERO_TOL;
    let lambda_lin_pp0_nonzero = lambda_pp.abs() > NONZERO_TOL;
    Ok(HypothesisReport {
        zero_multiplicity: coarse.zeros,
        geometric_multiplicity: coarse.nullity,
        square_nullity: coarse.square_nullity,
        spectral_gap: coarse.gap,
        spectral_gap_refined: fine.gap,
        omega_nl_pp0: omega_pp,
        lambda_lin_pp0: lambda_pp,
        omega_nl_pp0_nonzero,
        lambda_lin_pp0_nonzero,
        reverser_defects: defects,
        reversers_verified,
        h2_pass: coarse.zeros == 2 && coarse.square_nullity == 2 && coarse.gap > ZERO_TOL,
        h5_pass: omega_nl_pp0_nonzero && lambda_lin_pp0_nonzero,
        inconclusive,
    })
}
