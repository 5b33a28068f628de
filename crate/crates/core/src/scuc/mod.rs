//! SCUC / stochastic SCUC model construction and solution extraction.

mod builder;
mod reduction;
mod schedule;

use thiserror::Error;

pub use builder::{build_scuc, family_counts, FamilyCounts, ScucOptions, VariableIndex};
pub use reduction::{apply_reduction, PlanEntry, ReducedProblem, ReductionPlan};
pub use schedule::{
    check_min_updown, check_row, evaluate_schedule, extract_schedule, CommitmentSchedule, Extracted, UpDownViolation,
    ViolationKind,
};

use crate::grid::GridError;
use crate::milp::MilpError;

#[derive(Debug, Error)]
pub enum ScucError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("inconsistent options: {0}")]
    Options(String),
    #[error("plan entry for generator {generator}, period {period} is outside the model")]
    UnknownPlanEntry { generator: usize, period: usize },
    #[error("cannot extract a schedule from a solution with status {0}")]
    NoSolution(&'static str),
}
