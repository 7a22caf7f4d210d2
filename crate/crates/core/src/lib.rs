pub mod banded;
pub mod center_flow;
pub mod defect_bvp;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod harness;
pub mod models;
pub mod ode;
pub mod quadrature;
pub mod scalar_saddle;
pub mod wave_trains;

pub use error::{Error, Result};
