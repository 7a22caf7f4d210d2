use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Taylor coefficients `g[i][j]` of `y^i ω^j` around the origin, for `i + j <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTable {
    order: usize,
    coeffs: Vec<Vec<f64>>,
}

impl TaylorTable {
    pub fn zeros(order: usize) -> Self {
        let coeffs = (0..=order).map(|i| vec![0.0; order + 1 - i]).collect();
        Self { order, coeffs }
    }

    pub fn from_terms(order: usize, terms: &[(usize, usize, f64)]) -> Self {
        let mut t = Self::zeros(order);
        for &(i, j, c) in terms {
            if i + j <= order {
                t.coeffs[i][j] += c;
            }
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `y^i ω^j`; zero beyond the table.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j <= self.order {
            self.coeffs[i][j]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        assert!(i + j <= self.order, "monomial beyond table order");
        self.coeffs[i][j] = c;
    }

    /// Nonzero entries as `(i, j, c)`.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    pub fn eval(&self, y: f64, omega: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..=self.order).rev() {
            let row = &self.coeffs[i];
            let mut r = 0.0;
            for j in (0..row.len()).rev() {
                r = r * omega + row[j];
            }
            acc = acc * y + r;
        }
        acc
    }
}

type GFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The scalar field `y' = ω + y² + g(y, ω)` with `ω = ε²`.
#[derive(Clone)]
pub struct SaddleField {
    name: String,
    g: GFn,
    taylor: TaylorTable,
    smoothness_order: usize,
    is_even_in_y: bool,
}

impl fmt::Debug for SaddleField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaddleField")
            .field("name", &self.name)
            .field("taylor", &self.taylor)
            .field("smoothness_order", &self.smoothness_order)
            .field("is_even_in_y", &self.is_even_in_y)
            .finish()
    }
}

const DEGENERACY_TOL: f64 = 1e-12;

impl SaddleField {
    /// General constructor. Checks the saddle-node degeneracy conditions on the
    /// Taylor table and, if `is_even_in_y`, samples `g(-y, ω) = g(y, ω)`.
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        taylor: TaylorTable,
        smoothness_order: usize,
        is_even_in_y: bool,
    ) -> Result<Self> {
        if smoothness_order < 4 {
            return Err(Error::DomainError(format!("smoothness order r = {smoothness_order} < 4")));
        }
        if taylor.order() < 5 {
            return Err(Error::OrderTooLow { available: taylor.order(), required: 5 });
        }
        for (i, j, label) in
            [(0, 0, "g(0,0)"), (1, 0, "g_y(0,0)"), (2, 0, "g_yy(0,0)"), (0, 1, "g_w(0,0)"), (1, 1, "g_yw(0,0)")]
        {
            if taylor.get(i, j).abs() > DEGENERACY_TOL {
                return Err(Error::DomainError(format!("{label} = {} must vanish", taylor.get(i, j))));
            }
        }
        let field = Self { name: name.into(), g: Arc::new(g), taylor, smoothness_order, is_even_in_y };
        if is_even_in_y {
            for k in 1..=20 {
                let y = 0.05 * k as f64;
                for &w in &[0.0, 1e-4, 1e-2] {
                    let (a, b) = (field.g(y, w), field.g(-y, w));
                    if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                        return Err(Error::DomainError(format!(
                            "g not even in y: g({y}, {w}) = {a}, g(-{y}, {w}) = {b}"
                        )));
                    }
                }
            }
        }
        Ok(field)
    }

    /// Polynomial `g = Σ c y^i ω^j`; the Taylor table is exact and evenness is read off the exponents.
    pub fn polynomial(name: impl Into<String>, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let order = terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0).max(6);
        let table = TaylorTable::from_terms(order, terms);
        let even = terms.iter().all(|&(i, _, c)| i % 2 == 0 || c == 0.0);
        let eval_table = table.clone();
        Self::new(name, move |y, w| eval_table.eval(y, w), table, usize::MAX, even)
    }

    /// `g ≡ 0`.
    pub fn quadratic() -> Self {
        Self::polynomial("g=0", &[]).expect("valid field")
    }

    /// `g = c·y³`.
    pub fn cubic(c: f64) -> Self {
        Self::polynomial(format!("g={c}y^3"), &[(3, 0, c)]).expect("valid field")
    }

    /// `g = y⁴`.
    pub fn quartic() -> Self {
        Self::polynomial("g=y^4", &[(4, 0, 1.0)]).expect("valid field")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taylor(&self) -> &TaylorTable {
        &self.taylor
    }

    pub fn smoothness_order(&self) -> usize {
        self.smoothness_order
    }

    pub fn is_even_in_y(&self) -> bool {
        self.is_even_in_y
    }

    pub fn g(&self, y: f64, omega: f64) -> f64 {
        (self.g)(y, omega)
    }

    /// `ω + y² + g(y, ω)`.
    pub fn rhs(&self, y: f64, omega: f64) -> f64 {
        omega + y * y + (self.g)(y, omega)
    }

    /// `g_yyy(0,0) / 6`, the cubic coefficient that controls the log terms.
    pub fn cubic_coefficient(&self) -> f64 {
        self.taylor.get(3, 0)
    }

    /// `y ↦ -y` reflected field: `g̃(y, ω) = g(-y, ω)`. The travel time of the
    /// reflected field from 0 to δ equals the original one from -δ to 0.
    pub fn mirrored(&self) -> Self {
        let g = self.g.clone();
        let terms: Vec<_> =
            self.taylor.terms().into_iter().map(|(i, j, c)| (i, j, if i % 2 == 1 { -c } else { c })).collect();
        Self {
            name: format!("{} (mirrored)", self.name),
            g: Arc::new(move |y, w| g(-y, w)),
            taylor: TaylorTable::from_terms(self.taylor.order(), &terms),
            smoothness_order: self.smoothness_order,
            is_even_in_y: self.is_even_in_y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_linear_term() {
        let err = SaddleField::polynomial("bad", &[(1, 0, 0.5)]).unwrap_err();
        assert!(matches!(err, Error::DomainError(_)));
        let err = SaddleField::polynomial("bad", &[(1, 1, 0.5)]).unwrap_err();
        assert!(matches!(err, Error::DomainError(_)));
    }

    #[test]
    fn evenness_is_inferred() {
        assert!(SaddleField::quartic().is_even_in_y());
        assert!(!SaddleField::cubic(1.0).is_even_in_y());
        assert!(SaddleField::polynomial("q", &[(2, 1, 0.3), (0, 2, 1.0)]).unwrap().is_even_in_y());
    }

    #[test]
    fn false_evenness_claim_is_caught() {
        let t = TaylorTable::from_terms(6, &[(3, 0, 1.0)]);
        let err = SaddleField::new("liar", |y, _| y.powi(3), t, 6, true).unwrap_err();
        assert!(matches!(err, Error::DomainError(_)));
    }

    #[test]
    fn taylor_eval_and_mirror() {
        let f = SaddleField::polynomial("mix", &[(3, 0, 2.0), (4, 0, 1.0), (2, 1, -1.0)]).unwrap();
        let (y, w) = (0.3f64, 0.01f64);
        let g = 2.0 * y * y * y + y.powi(4) - y * y * w;
        assert!((f.g(y, w) - g).abs() < 1e-15);
        let m = f.mirrored();
        assert!((m.g(y, w) - f.g(-y, w)).abs() < 1e-15);
        assert_eq!(m.taylor().get(3, 0), -2.0);
        assert!((f.rhs(y, w) - (w + y * y + g)).abs() < 1e-15);
    }
}
