use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SaddleField;
use crate::error::{Error, Result};

/// Polynomial in `(z, ω)` truncated at weight `m + 2j <= w`.
#[derive(Debug, Clone)]
struct WPoly {
    w: usize,
    c: Vec<Vec<Complex64>>,
}

impl WPoly {
    fn zero(w: usize) -> Self {
        Self { w, c: (0..=w).map(|m| vec![Complex64::new(0.0, 0.0); (w - m) / 2 + 1]).collect() }
    }

    fn get(&self, m: usize, j: usize) -> Complex64 {
        if m <= self.w && m + 2 * j <= self.w {
            self.c[m][j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn add_at(&mut self, m: usize, j: usize, v: Complex64) {
        if m <= self.w && m + 2 * j <= self.w {
            self.c[m][j] += v;
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.w);
        for (m1, r1) in self.c.iter().enumerate() {
            for (j1, &a) in r1.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (m2, r2) in o.c.iter().enumerate().take(self.w - m1 + 1) {
                    for (j2, &b) in r2.iter().enumerate() {
                        out.add_at(m1 + m2, j1 + j2, a * b);
                    }
                }
            }
        }
        out
    }

    fn scaled_add(&mut self, o: &Self, s: Complex64) {
        for (m, r) in o.c.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                self.add_at(m, j, s * v);
            }
        }
    }

    fn dz(&self) -> Self {
        let mut out = Self::zero(self.w);
        for m in 1..=self.w {
            for j in 0..self.c[m].len() {
                out.add_at(m - 1, j, self.c[m][j] * m as f64);
            }
        }
        out
    }
}

/// Normal form `z' = n0(ω) + (1 + a(ω)) z² + b(ω) z³` reached through the
/// near-identity change of variables `y = Ψ(z, ω)`.
///
/// Coefficients are polynomials in `ω`, truncated at weight `order` where `z`
/// has weight 1 and `ω` weight 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub order: usize,
    pub n0: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `psi[k][j]`: coefficient of `z^k ω^j` in `Ψ`.
    pub psi: Vec<Vec<f64>>,
    /// Largest residual coefficient of `F(Ψ) - Ψ_z N` within the truncation.
    pub residual_norm: f64,
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

impl NormalForm {
    pub fn n0(&self, omega: f64) -> f64 {
        horner(&self.n0, omega)
    }

    pub fn a(&self, omega: f64) -> f64 {
        horner(&self.a, omega)
    }

    pub fn b(&self, omega: f64) -> f64 {
        horner(&self.b, omega)
    }

    /// `n0 + (1 + a) z² + b z³`.
    pub fn rhs(&self, z: f64, omega: f64) -> f64 {
        self.n0(omega) + (1.0 + self.a(omega)) * z * z + self.b(omega) * z * z * z
    }

    pub fn psi(&self, z: f64, omega: f64) -> f64 {
        let coeffs: Vec<f64> = self.psi.iter().map(|row| horner(row, omega)).collect();
        horner(&coeffs, z)
    }

    pub fn psi_z(&self, z: f64, omega: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.psi.len()).rev() {
            acc = acc * z + k as f64 * horner(&self.psi[k], omega);
        }
        acc
    }

    /// Solves `Ψ(z, ω) = y` by Newton from `z = y - ψ0(ω)`.
    pub fn invert(&self, y: f64, omega: f64) -> Result<f64> {
        let mut z = y - horner(&self.psi[0], omega);
        for _ in 0..100 {
            let r = self.psi(z, omega) - y;
            let d = self.psi_z(z, omega);
            if d.abs() < 1e-3 {
                return Err(Error::SingularJacobian(format!("Psi_z({z}) = {d}")));
            }
            let step = r / d;
            z -= step;
            if step.abs() <= 1e-16 * (1.0 + z.abs()) {
                return Ok(z);
            }
        }
        Err(Error::NewtonDiverged { iterations: 100, residual: (self.psi(z, omega) - y).abs() })
    }

    /// Normal form of the reflected field `y ↦ -y`: `Ψ̃(z) = -Ψ(-z)`, `b̃ = -b`.
    pub fn mirrored(&self) -> Self {
        let psi = self
            .psi
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let s = if k % 2 == 0 { -1.0 } else { 1.0 };
                row.iter().map(|v| s * v).collect()
            })
            .collect();
        Self {
            order: self.order,
            n0: self.n0.clone(),
            a: self.a.clone(),
            b: self.b.iter().map(|v| -v).collect(),
            psi,
            residual_norm: self.residual_norm,
        }
    }
}

/// Rows `(m, j)` with `m + 2j <= w`; each pins one unknown.
fn rows(w: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for m in 0..=w {
        for j in 0..=(w - m) / 2 {
            out.push((m, j));
        }
    }
    out
}

fn residual(field: &SaddleField, w: usize, layout: &[(usize, usize)], x: &[Complex64]) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut psi = WPoly::zero(w);
    let mut n = WPoly::zero(w);
    psi.add_at(1, 0, one);
    n.add_at(2, 0, one);
    for (&(m, j), &v) in layout.iter().zip(x) {
        match m {
            0 => n.add_at(0, j, v),
            1 => psi.add_at(0, j, v),
            2 => n.add_at(2, j, v),
            3 => n.add_at(3, j, v),
            _ => psi.add_at(m - 1, j, v),
        }
    }
    let t = field.taylor();
    let mut f = WPoly::zero(w);
    f.add_at(0, 1, one);
    let mut power = WPoly::zero(w);
    power.add_at(0, 0, one);
    for i in 0..=w {
        let mut gi = WPoly::zero(w);
        for j in 0..=w / 2 {
            let c = if i == 2 && j == 0 { 1.0 } else { 0.0 } + t.get(i, j);
            if c != 0.0 {
                gi.add_at(0, j, Complex64::new(c, 0.0));
            }
        }
        f.scaled_add(&power.mul(&gi), one);
        power = power.mul(&psi);
    }
    f.scaled_add(&psi.dz().mul(&n), -one);
    layout.iter().map(|&(m, j)| f.get(m, j)).collect()
}

/// Fits the normal form by Newton iteration on the weighted coefficient equations.
pub fn fit_normal_form(field: &SaddleField, order: usize) -> Result<NormalForm> {
    if order < 4 {
        return Err(Error::OrderTooLow { available: order, required: 4 });
    }
    if field.taylor().order() < order {
        return Err(Error::OrderTooLow { available: field.taylor().order(), required: order });
    }
    let layout = rows(order);
    let n = layout.len();
    let mut x = vec![0.0; n];
    let h = 1e-30;
    let mut converged = false;
    let mut res_norm = f64::INFINITY;
    for _ in 0..50 {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let r: Vec<f64> = residual(field, order, &layout, &xc).iter().map(|c| c.re).collect();
        res_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res_norm < 1e-14 {
            converged = true;
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut xp = xc.clone();
            xp[col].im = h;
            for (row, v) in residual(field, order, &layout, &xp).iter().enumerate() {
                jac[(row, col)] = v.im / h;
            }
        }
        let step = jac
            .lu()
            .solve(&DVector::from_vec(r))
            .ok_or_else(|| Error::SingularJacobian("normal-form coefficient system".into()))?;
        for (xi, s) in x.iter_mut().zip(step.iter()) {
            *xi -= s;
        }
    }
    if !converged {
        return Err(Error::NewtonDiverged { iterations: 50, residual: res_norm });
    }
    let half = order / 2 + 1;
    let mut nf = NormalForm {
        order,
        n0: vec![0.0; half],
        a: vec![0.0; half],
        b: vec![0.0; half],
        psi: vec![vec![0.0; half]; order],
        residual_norm: res_norm,
    };
    nf.psi[1][0] = 1.0;
    for (&(m, j), &v) in layout.iter().zip(&x) {
        match m {
            0 => nf.n0[j] = v,
            1 => nf.psi[0][j] = v,
            2 => nf.a[j] = v,
            3 => nf.b[j] = v,
            _ => nf.psi[m - 1][j] = v,
        }
    }
    Ok(nf)
}
