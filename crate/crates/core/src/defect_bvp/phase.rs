use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::newton::TruncatedDefect;
use super::residual::dx_at;
use crate::error::{Error, Result};
use crate::fourier::{coefficients, interp_matrix, nodes};
use crate::wave_trains::WaveTrain;

/// Local phase `α_L(x)` and wavenumber `y_L(x) = α_L'(x)` relative to a wave train `P`,
/// with `u(x, τ) ≈ P(τ + α_L(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCoordinates {
    pub x_samples: Vec<f64>,
    /// Lifted phase; `NaN` at ambiguous samples.
    pub alpha_l: Vec<f64>,
    pub y_l: Vec<f64>,
    /// RMS misfit `‖u(x,·) - P(· + α)‖ / ‖P‖` at the optimum.
    pub fit_residuals: Vec<f64>,
    /// Samples where the optimal phase is not unique.
    pub ambiguous: Vec<usize>,
}

impl PhaseCoordinates {
    /// Fails with `FitAmbiguous` at the first ambiguous sample.
    pub fn strict(self) -> Result<Self> {
        match self.ambiguous.first() {
            Some(&i) => Err(Error::FitAmbiguous(self.x_samples[i])),
            None => Ok(self),
        }
    }

    /// Index of the sample nearest to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, xi) in self.x_samples.iter().enumerate() {
            if (xi - x).abs() < (self.x_samples[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

/// Per-component coefficients `n = 0..=N/2`.
fn coeffs(values: &[f64], d: usize) -> Vec<Vec<Complex64>> {
    (0..d).map(|c| coefficients(&values.iter().skip(c).step_by(d).copied().collect::<Vec<_>>())).collect()
}

/// `G(α) = (1/N) Σ_j ⟨v(τ_j), p(τ_j + α)⟩` and its first two α-derivatives.
fn correlation(v: &[Vec<Complex64>], p: &[Vec<Complex64>], n: usize, alpha: f64) -> [f64; 3] {
    let half = n / 2;
    let mut g = [0.0; 3];
    for (vc, pc) in v.iter().zip(p) {
        g[0] += vc[0].re * pc[0].re;
        for k in 1..half {
            let kf = k as f64;
            let z = vc[k].conj() * pc[k] * Complex64::from_polar(1.0, kf * alpha);
            g[0] += 2.0 * z.re;
            g[1] += -2.0 * kf * z.im;
            g[2] += -2.0 * kf * kf * z.re;
        }
        let (hf, w) = (half as f64, vc[half].re * pc[half].re);
        g[0] += w * (hf * alpha).cos();
        g[1] += -w * hf * (hf * alpha).sin();
        g[2] += -w * hf * hf * (hf * alpha).cos();
    }
    g
}

/// `(1/N) Σ_j |p(τ_j + α)|²` and its first two α-derivatives (only the Nyquist mode moves).
fn shifted_energy(p: &[Vec<Complex64>], n: usize, alpha: f64) -> [f64; 3] {
    let half = n / 2;
    let hf = half as f64;
    let mut e = [0.0; 3];
    for pc in p {
        e[0] += pc[0].re.powi(2) + 2.0 * (1..half).map(|k| pc[k].norm_sqr()).sum::<f64>();
        let w = pc[half].re.powi(2);
        e[0] += w * (hf * alpha).cos().powi(2);
        e[1] += -w * hf * (2.0 * hf * alpha).sin();
        e[2] += -2.0 * w * hf * hf * (2.0 * hf * alpha).cos();
    }
    e
}

/// Minimiser of `D(α) = (1/N)Σ|v - p(·+α)|²` over the circle: `(α, D(α), ambiguous)`.
fn best_phase(v: &[Vec<Complex64>], p: &[Vec<Complex64>], n: usize, v_energy: f64) -> (f64, f64, bool) {
    let dist = |a: f64| {
        let g = correlation(v, p, n, a);
        let e = shifted_energy(p, n, a);
        [v_energy + e[0] - 2.0 * g[0], e[1] - 2.0 * g[1], e[2] - 2.0 * g[2]]
    };
    let m = 16 * n;
    let samples: Vec<f64> = (0..m).map(|k| dist(TAU * k as f64 / m as f64)[0]).collect();
    let (k0, _) = samples.iter().enumerate().fold((0, f64::INFINITY), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
    let spread = samples.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - samples[k0];
    let mut a = TAU * k0 as f64 / m as f64;
    let step = TAU / m as f64;
    for _ in 0..20 {
        let dv = dist(a);
        if dv[2] <= 0.0 {
            break;
        }
        let da = (-dv[1] / dv[2]).clamp(-step, step);
        a += da;
        if da.abs() < 1e-15 {
            break;
        }
    }
    let d_min = dist(a)[0].max(0.0);
    // A second well-separated local minimum at the same depth makes the fit ambiguous.
    let mut ambiguous = spread <= 1e-12 * (v_energy + shifted_energy(p, n, 0.0)[0]);
    for k in 0..m {
        let (l, r) = (samples[(k + m - 1) % m], samples[(k + 1) % m]);
        let sep =
            (k as isize - k0 as isize).rem_euclid(m as isize).min((k0 as isize - k as isize).rem_euclid(m as isize));
        if samples[k] <= l && samples[k] <= r && sep > 2 && samples[k] - d_min <= 1e-9 * spread.max(1e-300) {
            ambiguous = true;
        }
    }
    (a.rem_euclid(TAU), d_min, ambiguous)
}

/// Phase coordinates of every x-node of `defect` relative to `wt`.
pub fn extract_phase_coordinates(defect: &TruncatedDefect, wt: &WaveTrain) -> Result<PhaseCoordinates> {
    let (n, d) = (defect.grid.n_tau, defect.dim);
    if wt.n_tau != n || wt.dim != d {
        return Err(Error::ShapeMismatch("wave train and defect use different τ-grids".into()));
    }
    let p = coeffs(&wt.values, d);
    let p_energy = shifted_energy(&p, n, 0.0)[0];
    let b = defect.block();
    let mut out = PhaseCoordinates {
        x_samples: defect.grid.x_nodes.clone(),
        alpha_l: Vec::with_capacity(defect.grid.n_x),
        y_l: Vec::with_capacity(defect.grid.n_x),
        fit_residuals: Vec::with_capacity(defect.grid.n_x),
        ambiguous: Vec::new(),
    };
    let mut last: Option<f64> = None;
    for i in 0..defect.grid.n_x {
        let slice = defect.slice(i);
        let v = coeffs(slice, d);
        let v_energy = slice.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let (a, dmin, amb) = best_phase(&v, &p, n, v_energy);
        out.fit_residuals.push((dmin / p_energy).sqrt());
        if amb || v_energy <= 1e-12 * p_energy {
            out.ambiguous.push(i);
            out.alpha_l.push(f64::NAN);
            out.y_l.push(f64::NAN);
            continue;
        }
        let lifted = match last {
            Some(prev) => a + TAU * ((prev - a) / TAU).round(),
            None => a,
        };
        last = Some(lifted);
        out.alpha_l.push(lifted);
        // Implicit differentiation of D_α(α(x); u(x)) = 0.
        let ux = coeffs(&dx_at(&defect.grid, b, &defect.u, i), d);
        let g_ux = correlation(&ux, &p, n, a)[1];
        let g = correlation(&v, &p, n, a);
        let e = shifted_energy(&p, n, a);
        let d_aa = e[2] - 2.0 * g[2];
        out.y_l.push(2.0 * g_ux / d_aa);
    }
    Ok(out)
}

/// Reversers acting on `(u, u_x)(x, τ)` through `x ↦ -x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reverser {
    /// `u(-x, τ) = u(x, τ)`.
    R0,
    /// `u(-x, τ) = u(x, τ + π)`.
    Rpi,
}

/// Largest violation of the reverser symmetry on `u` and (sign-flipped) on `u_x`.
pub fn check_reversibility(defect: &TruncatedDefect, reverser: Reverser) -> f64 {
    let (n, d, nx, b) = (defect.grid.n_tau, defect.dim, defect.grid.n_x, defect.block());
    let shift = match reverser {
        Reverser::R0 => 0,
        Reverser::Rpi => n / 2,
    };
    let mut worst = 0.0f64;
    for i in 0..nx {
        let m = nx - 1 - i;
        let (a, bm) = (defect.slice(i), defect.slice(m));
        let (ax, bx) = (dx_at(&defect.grid, b, &defect.u, i), dx_at(&defect.grid, b, &defect.u, m));
        for j in 0..n {
            let js = (j + shift) % n;
            for c in 0..d {
                worst = worst.max((a[j * d + c] - bm[js * d + c]).abs());
                worst = worst.max((ax[j * d + c] + bx[js * d + c]).abs());
            }
        }
    }
    worst
}

/// Translate of nodal `[j·d + c]` data: `v(τ_j + α)`.
pub(crate) fn shift_slice(values: &[f64], n: usize, d: usize, alpha: f64) -> Vec<f64> {
    let targets: Vec<f64> = nodes(n).iter().map(|t| t + alpha).collect();
    let m = interp_matrix(n, &targets);
    let mut out = vec![0.0; values.len()];
    for j in 0..n {
        for k in 0..n {
            let w = m[(j, k)];
            for c in 0..d {
                out[j * d + c] += w * values[k * d + c];
            }
        }
    }
    out
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Golden-section minimisation of `f` on `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fc, mut fe) = (f(c), f(e));
    while hi - lo > tol {
        if fc < fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + r * (hi - lo);
            fe = f(e);
        }
    }
    if fc < fe {
        (c, fc)
    } else {
        (e, fe)
    }
}

/// `min_α sup_τ |a(τ) - b(τ + α)|` over the τ-nodes: `(α, distance)`.
pub fn orbit_distance(a: &[f64], b: &[f64], n: usize, d: usize) -> (f64, f64) {
    let (va, vb) = (coeffs(a, d), coeffs(b, d));
    let ea = a.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let (a0, _, _) = best_phase(&va, &vb, n, ea);
    let w = TAU / n as f64;
    let (alpha, dist) = golden(|s| sup_diff(a, &shift_slice(b, n, d, s)), a0 - w, a0 + w, 1e-12);
    (alpha.rem_euclid(TAU), dist)
}

/// Best common τ-shift with `d2(x, τ) ≈ d1(x, τ + α)`: `(α̂, sup mismatch)`.
pub fn check_uniqueness_mod_translation(d1: &TruncatedDefect, d2: &TruncatedDefect) -> Result<(f64, f64)> {
    if d1.grid.n_x != d2.grid.n_x || d1.grid.n_tau != d2.grid.n_tau || d1.dim != d2.dim {
        return Err(Error::ShapeMismatch("defects live on different grids".into()));
    }
    if (d1.grid.l - d2.grid.l).abs() > 1e-12 * d1.grid.l {
        return Err(Error::ShapeMismatch(format!("L differs: {} vs {}", d1.grid.l, d2.grid.l)));
    }
    let (n, d) = (d1.grid.n_tau, d1.dim);
    // Summed correlation over all x picks the basin; golden section finishes in sup norm.
    let m = 16 * n;
    let mut score = vec![0.0; m];
    for i in 0..d1.grid.n_x {
        let (va, vb) = (coeffs(d2.slice(i), d), coeffs(d1.slice(i), d));
        for (k, s) in score.iter_mut().enumerate() {
            *s += correlation(&va, &vb, n, TAU * k as f64 / m as f64)[0];
        }
    }
    let k0 = (0..m).fold(0, |b, k| if score[k] > score[b] { k } else { b });
    let a0 = TAU * k0 as f64 / m as f64;
    let mismatch = |s: f64| {
        (0..d1.grid.n_x).fold(0.0f64, |acc, i| acc.max(sup_diff(d2.slice(i), &shift_slice(d1.slice(i), n, d, s))))
    };
    let w = TAU / m as f64;
    let (alpha, dist) = golden(mismatch, a0 - 2.0 * w, a0 + 2.0 * w, 1e-12);
    Ok((alpha.rem_euclid(TAU), dist))
}
