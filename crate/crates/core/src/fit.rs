//! Ordinary least-squares line fits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation from the fit.
    pub residual: f64,
}

/// `y ≈ slope·x + intercept`. Needs at least two distinct abscissae.
pub fn line_fit(pts: &[(f64, f64)]) -> LogFit {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    LogFit { slope, intercept, residual: (ss / m).sqrt() }
}

/// Slope of `log y` against `log x`.
pub fn loglog_fit(pts: &[(f64, f64)]) -> LogFit {
    line_fit(&pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect::<Vec<_>>())
}

/// Least-squares coefficients of `y ≈ Σ c_k φ_k(x)`; columns are scaled before the SVD solve.
pub fn basis_fit(xs: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Vec<f64> {
    let a = nalgebra::DMatrix::from_fn(xs.len(), basis.len(), |i, k| basis[k](xs[i]));
    let scale: Vec<f64> = (0..basis.len()).map(|k| a.column(k).norm().max(f64::MIN_POSITIVE)).collect();
    let scaled = nalgebra::DMatrix::from_fn(xs.len(), basis.len(), |i, k| a[(i, k)] / scale[k]);
    let c = scaled
        .svd(true, true)
        .solve(&nalgebra::DVector::from_column_slice(ys), 1e-14)
        .expect("SVD computed with both factors");
    c.iter().zip(&scale).map(|(c, s)| c / s).collect()
}

/// Polynomial coefficients, lowest degree first.
pub fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let powers: Vec<Box<dyn Fn(f64) -> f64>> =
        (0..=degree).map(|k| Box::new(move |x: f64| x.powi(k as i32)) as _).collect();
    let refs: Vec<&dyn Fn(f64) -> f64> = powers.iter().map(|b| b.as_ref()).collect();
    basis_fit(xs, ys, &refs)
}
