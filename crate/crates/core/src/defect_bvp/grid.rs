use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::nodes;

/// Uniform symmetric grid on `[-L, L]` times `N_tau` collocation nodes on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub l: f64,
    pub n_x: usize,
    pub n_tau: usize,
    pub x_nodes: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn new(l: f64, n_x: usize, n_tau: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::ConfigInvalid(format!("half-length L = {l} must be positive")));
        }
        if n_x < 64 {
            return Err(Error::ConfigInvalid(format!("N_x = {n_x} must be at least 64")));
        }
        if n_tau < 8 || n_tau % 2 != 0 {
            return Err(Error::ConfigInvalid(format!("N_tau = {n_tau} must be even and at least 8")));
        }
        let h = 2.0 * l / (n_x - 1) as f64;
        let x_nodes = (0..n_x)
            .map(|i| {
                // Mirror-exact construction keeps the grid symmetric to the last bit.
                let j = n_x - 1 - i;
                if i <= j {
                    -l + i as f64 * h
                } else {
                    l - j as f64 * h
                }
            })
            .collect();
        Ok(Self { l, n_x, n_tau, x_nodes })
    }

    /// Grid with spacing `h` and half-length rounded to a whole number of cells.
    pub fn with_spacing(l: f64, h: f64, n_tau: usize) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::ConfigInvalid(format!("spacing h = {h} must be positive")));
        }
        let cells = (l / h).round().max(1.0) as usize;
        Self::new(cells as f64 * h, 2 * cells + 1, n_tau)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / (self.n_x - 1) as f64
    }

    pub fn tau_nodes(&self) -> Vec<f64> {
        nodes(self.n_tau)
    }

    /// Index of `x_i` reflected evenly across the end points.
    pub(crate) fn reflect(&self, i: isize) -> usize {
        let last = (self.n_x - 1) as isize;
        let mut j = i;
        while j < 0 || j > last {
            if j < 0 {
                j = -j;
            }
            if j > last {
                j = 2 * last - j;
            }
        }
        j as usize
    }
}
