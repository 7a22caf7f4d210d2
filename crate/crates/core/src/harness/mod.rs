//! Experiment configuration, result persistence and the acceptance suite.

mod accept;
mod config;
mod experiments;
mod output;
mod solution;

pub use accept::{accept, report, AcceptOptions, AcceptanceSummary, CriterionResult, Status};
pub use config::{Experiment, ExperimentConfig, Params, SCHEMA_VERSION};
pub use experiments::{compute, run, validate};
pub use output::{format_float, Check, ResultRecord, Table};
pub use solution::{read_family, read_solution, solution_stem, write_solution, SolutionSidecar};
