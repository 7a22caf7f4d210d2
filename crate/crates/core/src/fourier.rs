//! Fourier collocation on `N` equispaced nodes `τ_j = 2πj/N`, `N` even.
//!
//! The interpolant carries modes `|n| < N/2` plus a `cos(Nτ/2)` Nyquist term.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Periodic cardinal function `S_N(t)` with `S_N(τ_j) = δ_{j0}`.
pub fn cardinal(n: usize, t: f64) -> f64 {
    let half = n / 2;
    let mut s = 1.0 + (half as f64 * t).cos();
    for k in 1..half {
        s += 2.0 * (k as f64 * t).cos();
    }
    s / n as f64
}

/// Spectral differentiation matrix of order 1 or 2.
pub fn diff_matrix(n: usize, order: usize) -> DMatrix<f64> {
    assert!(n % 2 == 0 && n >= 2, "N must be even");
    let h = TAU / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        let sign = if (j + n - k) % 2 == 0 { 1.0 } else { -1.0 };
        let t = (j as f64 - k as f64) * h;
        match (order, j == k) {
            (1, true) => 0.0,
            (1, false) => 0.5 * sign / (0.5 * t).tan(),
            (2, true) => -PI * PI / (3.0 * h * h) - 1.0 / 6.0,
            (2, false) => -0.5 * sign / (0.5 * t).sin().powi(2),
            _ => panic!("unsupported derivative order {order}"),
        }
    })
}

/// Rows evaluate the interpolant of nodal data at `targets`.
pub fn interp_matrix(n: usize, targets: &[f64]) -> DMatrix<f64> {
    let tau = nodes(n);
    DMatrix::from_fn(targets.len(), n, |i, j| cardinal(n, targets[i] - tau[j]))
}

/// Evaluates the interpolant of `values` (scalar nodal data) at `t`.
pub fn interpolate(values: &[f64], t: f64) -> f64 {
    let n = values.len();
    let tau = nodes(n);
    values.iter().zip(&tau).map(|(v, tj)| v * cardinal(n, t - tj)).sum()
}

/// Coefficients `c_k = (1/N) Σ u_j e^{-ikτ_j}` for `k = 0..=N/2`.
pub fn coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let tau = nodes(n);
    (0..=n / 2)
        .map(|k| {
            let mut c = Complex64::new(0.0, 0.0);
            for (v, t) in values.iter().zip(&tau) {
                c += Complex64::from_polar(*v, -(k as f64) * t);
            }
            c / n as f64
        })
        .collect()
}

/// Up-sampling to `M` nodes and projection back, `down · up = I`.
#[derive(Debug, Clone)]
pub struct Dealias {
    pub n: usize,
    pub m: usize,
    pub up: DMatrix<f64>,
    pub down: DMatrix<f64>,
}

impl Dealias {
    pub fn new(n: usize, m: usize) -> Self {
        assert!(m > n, "fine grid must be larger");
        let fine = nodes(m);
        let coarse = nodes(n);
        let up = interp_matrix(n, &fine);
        let half = n / 2;
        let down = DMatrix::from_fn(n, m, |j, i| {
            let t = coarse[j] - fine[i];
            let mut s = 1.0;
            for k in 1..half {
                s += 2.0 * (k as f64 * t).cos();
            }
            s += 2.0 * (half as f64 * coarse[j]).cos() * (half as f64 * fine[i]).cos();
            s / m as f64
        });
        Self { n, m, up, down }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_trig_polynomials() {
        let n = 16;
        let tau = nodes(n);
        let u: Vec<f64> = tau.iter().map(|t| (3.0 * t).sin() + (2.0 * t).cos()).collect();
        let d1 = diff_matrix(n, 1);
        let d2 = diff_matrix(n, 2);
        let v = nalgebra::DVector::from_vec(u);
        let du = &d1 * &v;
        let ddu = &d2 * &v;
        for (j, t) in tau.iter().enumerate() {
            assert!((du[j] - (3.0 * (3.0 * t).cos() - 2.0 * (2.0 * t).sin())).abs() < 1e-12);
            assert!((ddu[j] + 9.0 * (3.0 * t).sin() + 4.0 * (2.0 * t).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn dealias_round_trip() {
        let d = Dealias::new(8, 24);
        let prod = &d.down * &d.up;
        assert!((prod - DMatrix::identity(8, 8)).amax() < 1e-13);
    }

    #[test]
    fn interpolation_is_exact_for_band_limited() {
        let n = 8;
        let u: Vec<f64> = nodes(n).iter().map(|t| 1.0 + t.cos() - 0.5 * (2.0 * t).sin()).collect();
        let t = 0.37;
        assert!((interpolate(&u, t) - (1.0 + t.cos() - 0.5 * (2.0 * t).sin())).abs() < 1e-13);
        let c = coefficients(&u);
        assert!((c[1].re - 0.5).abs() < 1e-14 && (c[2].im - 0.25).abs() < 1e-14);
    }
}
