//! Truncated contact defects: the time-periodic boundary-value problem on `[-L, L] × S¹`.

mod continuation;
mod grid;
mod guess;
mod newton;
mod phase;
mod residual;
mod scaling;

pub use continuation::{continue_in_l, continue_in_l_logged, extend_defect, ContinuationOptions, ContinuationStep};
pub use grid::SpaceTimeGrid;
pub use guess::{build_dark_core_guess, build_initial_guess};
pub use newton::{newton_solve, newton_solve_with, NewtonOptions, TruncatedDefect};
pub use phase::{
    check_reversibility, check_uniqueness_mod_translation, extract_phase_coordinates, orbit_distance, PhaseCoordinates,
    Reverser,
};
pub use residual::assemble_residual;
pub use scaling::{verify_scaling, FamilyMember, ScalingReport};
