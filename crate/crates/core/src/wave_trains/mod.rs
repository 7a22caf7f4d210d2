//! Homogeneous oscillations, dispersion relations and hypothesis checks.

pub(crate) mod collocation;
mod dispersion;
mod hypotheses;
mod newton;
mod system;

pub use dispersion::{
    dispersion, floquet_exponents, linear_dispersion, nonlinear_dispersion, DispersionData, LinearDispersion,
    NonlinearDispersion,
};
pub use hypotheses::{check_hypotheses, reverser_defects, spatial_operator, HypothesisReport, DEFAULT_K_GRID};
pub use newton::{find_wave_train, WaveTrain};
pub use system::ReactionDiffusionSystem;
