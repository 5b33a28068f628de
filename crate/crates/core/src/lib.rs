//! Machine-learning assisted security-constrained unit commitment.
//!
//! The numerical core ([`milp`]) is generic over the floating-point type;
//! the power-system layers work in `f64` through the aliases below.

pub mod datagen;
pub mod feasibility;
pub mod grid;
pub mod milp;
pub mod pipeline;
pub mod predict;
pub mod scuc;
mod scalar;

pub use scalar::Scalar;

pub type Problem = milp::MilpProblem<f64>;
pub type Solution = milp::MilpSolution<f64>;
pub type Options = milp::SolveOptions<f64>;
