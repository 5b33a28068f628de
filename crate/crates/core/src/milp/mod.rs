//! Linear and mixed-integer linear programming.
//!
//! Problems are stated as minimization over bounded continuous and binary
//! variables. LPs are solved with a bounded-variable simplex; MILPs with
//! best-bound branch-and-bound on the most fractional binary, reusing one
//! simplex tableau across the whole tree.

mod branch;
pub mod mps;
mod problem;
mod simplex;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::solve_milp;
pub use problem::{fix_variables, Constraint, MilpProblem, Relation, VarKind, Variable};
pub use simplex::{BasisStatus, LpCertificate};

use crate::Scalar;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("variable {var} (#{index}) has invalid bounds")]
    InvalidBounds { var: String, index: usize },
    #[error("row {row} has a non-finite coefficient or right-hand side")]
    InvalidRow { row: String },
    #[error("row {row} references unknown variable #{index}")]
    UnknownVariable { row: String, index: usize },
    #[error("cannot fix {var} at {value}: bounds are [{lower}, {upper}]")]
    FixingOutOfBounds { var: String, value: f64, lower: f64, upper: f64 },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("malformed MPS input at line {line}: {msg}")]
    MpsParse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleGapMet,
    Infeasible,
    Unbounded,
    LimitReached,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleGapMet)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGapMet => "feasible-gap-met",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitReached => "limit-reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SolveOptions<T: Scalar> {
    /// Relative gap at which branch-and-bound stops.
    pub mip_gap: T,
    pub feasibility_tolerance: T,
    pub integrality_tolerance: T,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    /// Complete binary assignment tried before branching, keyed by variable.
    pub warm_start: Option<BTreeMap<usize, T>>,
    /// Kept for interface stability; the search itself is deterministic.
    pub seed: u64,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            mip_gap: T::lit(1e-4),
            feasibility_tolerance: T::lit(1e-6),
            integrality_tolerance: T::lit(1e-6),
            time_limit: None,
            node_limit: None,
            warm_start: None,
            seed: 0,
        }
    }
}

impl<T: Scalar> SolveOptions<T> {
    pub fn with_gap(mut self, gap: T) -> Self {
        self.mip_gap = gap;
        self
    }

    pub fn with_warm_start(mut self, warm: BTreeMap<usize, T>) -> Self {
        self.warm_start = Some(warm);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MilpSolution<T: Scalar> {
    pub status: SolveStatus,
    /// Empty when no incumbent exists.
    pub values: Vec<T>,
    pub objective: T,
    pub bound: T,
    pub gap: T,
    pub nodes_explored: usize,
    pub solve_time: f64,
    /// Simplex pivots and bound flips; a machine-independent work measure.
    pub iterations: u64,
    /// Objective of each successive incumbent.
    pub incumbent_trace: Vec<T>,
    /// Present for pure LP solves.
    pub certificate: Option<LpCertificate<T>>,
}

impl<T: Scalar> MilpSolution<T> {
    pub(crate) fn without_incumbent(status: SolveStatus, nodes: usize, time: f64, iterations: u64) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: T::infinity(),
            bound: T::infinity(),
            gap: T::infinity(),
            nodes_explored: nodes,
            solve_time: time,
            iterations,
            incumbent_trace: Vec::new(),
            certificate: None,
        }
    }
}

/// How solve effort is reported. `Work` counts simplex pivots and is
/// identical across runs and machines; `Wall` is elapsed seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    #[default]
    Work,
    Wall,
}

impl Clock {
    pub fn measure<T: Scalar>(self, solution: &MilpSolution<T>) -> f64 {
        match self {
            Clock::Work => solution.iterations as f64,
            Clock::Wall => solution.solve_time,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Clock::Work => "pivots",
            Clock::Wall => "s",
        }
    }
}

/// `|objective − bound| / max(|objective|, 1e-10)`.
pub fn relative_gap<T: Scalar>(objective: T, bound: T) -> T {
    if objective == bound {
        return T::zero();
    }
    (objective - bound).abs() / objective.abs().max(T::lit(1e-10))
}

/// Solves the continuous relaxation of `problem`.
pub fn solve_lp<T: Scalar>(problem: &MilpProblem<T>) -> Result<MilpSolution<T>, MilpError> {
    let start = std::time::Instant::now();
    let mut tab = simplex::Tableau::new(problem)?;
    let status = tab.reoptimize(None)?;
    let time = start.elapsed().as_secs_f64();
    Ok(match status {
        simplex::LpStatus::Optimal => {
            let values = tab.values().to_vec();
            let objective = problem.objective_value(&values);
            MilpSolution {
                status: SolveStatus::Optimal,
                values,
                objective,
                bound: objective,
                gap: T::zero(),
                nodes_explored: 0,
                solve_time: time,
                iterations: tab.iterations,
                incumbent_trace: vec![objective],
                certificate: Some(tab.certificate()),
            }
        }
        simplex::LpStatus::Unbounded => {
            let mut s = MilpSolution::without_incumbent(SolveStatus::Unbounded, 0, time, tab.iterations);
            s.objective = T::neg_infinity();
            s.bound = T::neg_infinity();
            s
        }
        _ => MilpSolution::without_incumbent(SolveStatus::Infeasible, 0, time, tab.iterations),
    })
}
