//! Banded matrix with one dense border row and column:
//!
//! ```text
//! [ A   b ]
//! [ cᵀ  δ ]
//! ```
//!
//! `A` may be singular with a one-dimensional kernel; the border is eliminated
//! together with the last pivot as a 2×2 block.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BorderedBanded {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + ku + kl` (room for pivoting fill).
    band: Vec<f64>,
    col: Vec<f64>,
    row: Vec<f64>,
    corner: f64,
}

impl BorderedBanded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self { n, kl, ku, band: vec![0.0; n * w], col: vec![0.0; n], row: vec![0.0; n], corner: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    /// Adds `v` at `(i, j)` of `A`; `(i, j)` must lie in the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.band[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.band[self.idx(i, j)]
        }
    }

    pub fn set_border(&mut self, col: Vec<f64>, row: Vec<f64>, corner: f64) {
        assert!(col.len() == self.n && row.len() == self.n);
        self.col = col;
        self.row = row;
        self.corner = corner;
    }

    /// `[A b; cᵀ δ] · [x; ξ]`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let xi = x[n];
        let mut out = vec![0.0; n + 1];
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(n - 1);
            let mut s = self.col[i] * xi;
            for j in lo..=hi {
                s += self.band[self.idx(i, j)] * x[j];
            }
            out[i] = s;
        }
        out[n] = self.row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.corner * xi;
        out
    }

    /// Gaussian elimination with partial pivoting inside the band.
    pub fn factor(&self) -> Result<BorderedLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        if n < 2 {
            return Err(Error::ShapeMismatch("bordered system needs n >= 2".into()));
        }
        let w = self.width();
        let reach = ku + kl;
        let mut a = self.band.clone();
        let mut col = self.col.clone();
        let mut row = self.row.clone();
        let mut corner = self.corner;
        let mut lower = vec![0.0; n * kl];
        let mut lrow = vec![0.0; n];
        let mut piv = vec![0usize; n];
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n - 1 {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[at(k, k)].abs();
            for i in k + 1..=last {
                let v = a[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if p != k {
                let hi = (k + reach).min(n - 1);
                for j in k..=hi {
                    a.swap(at(k, j), at(p, j));
                }
                col.swap(k, p);
            }
            let pivot = a[at(k, k)];
            if k == n - 2 {
                // Elimination of the last band row is done with the border in `solve2`.
                if pivot.abs() <= 1e-300 {
                    return Err(Error::SingularJacobian(format!("zero pivot at {k}")));
                }
            } else if pivot.abs() <= 1e-14 * scale {
                return Err(Error::SingularJacobian(format!("pivot {pivot:.3e} at row {k}")));
            }
            let hi = (k + reach).min(n - 1);
            for i in k + 1..=last {
                let m = a[at(i, k)] / pivot;
                lower[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=hi {
                        a[at(i, j)] -= m * a[at(k, j)];
                    }
                    col[i] -= m * col[k];
                }
                a[at(i, k)] = 0.0;
            }
            let m = row[k] / pivot;
            lrow[k] = m;
            if m != 0.0 {
                for j in k + 1..=hi {
                    row[j] -= m * a[at(k, j)];
                }
                corner -= m * col[k];
            }
            row[k] = 0.0;
        }
        let t = [[a[at(n - 1, n - 1)], col[n - 1]], [row[n - 1], corner]];
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        let tscale = t.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if det.abs() <= 1e-300 || det.abs() <= 1e-15 * tscale * tscale {
            return Err(Error::SingularJacobian(format!("final 2x2 block is singular (det {det:.3e})")));
        }
        Ok(BorderedLu { n, kl, ku, w, a, col, lower, lrow, piv, tail: t, det })
    }
}

/// Factors of [`BorderedBanded`].
#[derive(Debug, Clone)]
pub struct BorderedLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<f64>,
    col: Vec<f64>,
    lower: Vec<f64>,
    lrow: Vec<f64>,
    piv: Vec<usize>,
    tail: [[f64; 2]; 2],
    det: f64,
}

impl BorderedLu {
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    /// Solves `M x = rhs` (`rhs` has length `n + 1`).
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.n, self.kl);
        let mut x = rhs.to_vec();
        for k in 0..n - 1 {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                let last = (k + kl).min(n - 1);
                for i in k + 1..=last {
                    x[i] -= self.lower[k * kl + (i - k - 1)] * xk;
                }
                x[n] -= self.lrow[k] * xk;
            }
        }
        let t = &self.tail;
        let (r1, r2) = (x[n - 1], x[n]);
        x[n - 1] = (t[1][1] * r1 - t[0][1] * r2) / self.det;
        x[n] = (t[0][0] * r2 - t[1][0] * r1) / self.det;
        let xi = x[n];
        let reach = self.ku + kl;
        for k in (0..n - 1).rev() {
            let hi = (k + reach).min(n - 1);
            let mut s = x[k] - self.col[k] * xi;
            for j in k + 1..=hi {
                s -= self.a[self.at(k, j)] * x[j];
            }
            x[k] = s / self.a[self.at(k, k)];
        }
        x
    }

    /// Solves `Mᵀ y = rhs`.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.n, self.kl);
        let reach = self.ku + kl;
        let mut y = rhs.to_vec();
        // Ũᵀ w = rhs, forward over the band rows, then the 2×2 tail.
        for k in 0..n - 1 {
            y[k] /= self.a[self.at(k, k)];
            let yk = y[k];
            if yk != 0.0 {
                let hi = (k + reach).min(n - 1);
                for j in k + 1..=hi {
                    y[j] -= self.a[self.at(k, j)] * yk;
                }
                y[n] -= self.col[k] * yk;
            }
        }
        let t = &self.tail;
        let (r1, r2) = (y[n - 1], y[n]);
        // tailᵀ [w1; w2] = [r1; r2]
        y[n - 1] = (t[1][1] * r1 - t[1][0] * r2) / self.det;
        y[n] = (t[0][0] * r2 - t[0][1] * r1) / self.det;
        // Apply the elimination steps transposed, last first.
        for k in (0..n - 1).rev() {
            let last = (k + kl).min(n - 1);
            let mut s = y[k];
            for i in k + 1..=last {
                s -= self.lower[k * kl + (i - k - 1)] * y[i];
            }
            s -= self.lrow[k] * y[n];
            y[k] = s;
            y.swap(k, self.piv[k]);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn sample(n: usize, kl: usize, ku: usize, singular: bool) -> (BorderedBanded, DMatrix<f64>) {
        let mut m = BorderedBanded::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n + 1, n + 1);
        let mut seed = 1u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = rnd() + if i == j { 0.1 } else { 0.0 };
                m.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        if singular {
            // Make the row sums of A vanish: A·1 = 0.
            for i in 0..n {
                let s: f64 = (0..n).map(|j| dense[(i, j)]).sum();
                m.add(i, i, -s);
                dense[(i, i)] -= s;
            }
        }
        let col: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let row: Vec<f64> = (0..n).map(|_| rnd()).collect();
        for i in 0..n {
            dense[(i, n)] = col[i];
            dense[(n, i)] = row[i];
        }
        dense[(n, n)] = 0.3;
        m.set_border(col, row, 0.3);
        (m, dense)
    }

    #[test]
    fn solves_against_dense() {
        for singular in [false, true] {
            let (m, dense) = sample(40, 5, 4, singular);
            let lu = m.factor().unwrap();
            let rhs: Vec<f64> = (0..41).map(|i| (i as f64 * 0.37).sin()).collect();
            let x = lu.solve(&rhs);
            let back = &dense * DVector::from_vec(x.clone());
            for i in 0..41 {
                assert!((back[i] - rhs[i]).abs() < 1e-10, "singular={singular} row {i}");
            }
            let mv = m.matvec(&x);
            assert!(mv.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-10));
            let y = lu.solve_transpose(&rhs);
            let back = dense.transpose() * DVector::from_vec(y);
            for i in 0..41 {
                assert!((back[i] - rhs[i]).abs() < 1e-10, "transpose singular={singular} row {i}");
            }
        }
    }
}
