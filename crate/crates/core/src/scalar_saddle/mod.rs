//! Passage times through the saddle-node `y' = ε² + y² + g(y, ε²)`.

mod asymptote;
mod field;
mod inversion;
mod log_coeff;
mod normal_form;
mod partial_fraction;
mod travel;

pub use asymptote::{asymptote_check, asymptote_check_from, AsymptoteReport, AsymptoteWeight, ASYMPTOTE_START};
pub use field::{SaddleField, TaylorTable};
pub use inversion::{solve_epsilon_for_length, EpsilonStarResult};
pub use log_coeff::{extract_log_coefficient, LogCoefficientEstimate};
pub use normal_form::{fit_normal_form, NormalForm};
pub use partial_fraction::{travel_time_partial_fraction, CubicSplit, PartialFractionTime};
pub use travel::{
    integrate_to_event, travel_time_direct, travel_time_direct_with, EventHit, Leg, SaddleWindow, TravelMethod,
    TravelTimeResult,
};
