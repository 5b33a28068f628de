use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CommitmentSchedule, ScucError, VariableIndex};
use crate::milp::fix_variables;
use crate::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanEntry {
    /// Commitment decided ahead of the solve.
    Fixed(bool),
    /// Left to the solver, starting from `warm`.
    Flexible { warm: bool },
}

/// Per-(generator, period) decisions used to shrink a SCUC instance.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReductionPlan {
    /// `[g][t]`; `None` leaves the entry untouched.
    pub entries: Vec<Vec<Option<PlanEntry>>>,
}

impl ReductionPlan {
    pub fn empty(generators: usize, periods: usize) -> Self {
        Self { entries: vec![vec![None; periods]; generators] }
    }

    pub fn set(&mut self, g: usize, t: usize, entry: PlanEntry) {
        if self.entries.len() <= g {
            self.entries.resize(g + 1, Vec::new());
        }
        if self.entries[g].len() <= t {
            self.entries[g].resize(t + 1, None);
        }
        self.entries[g][t] = Some(entry);
    }

    pub fn get(&self, g: usize, t: usize) -> Option<PlanEntry> {
        self.entries.get(g).and_then(|row| row.get(t)).copied().flatten()
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, PlanEntry)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(g, row)| row.iter().enumerate().filter_map(move |(t, e)| e.map(|e| (g, t, e))))
    }

    pub fn fixed_count(&self) -> usize {
        self.iter().filter(|(_, _, e)| matches!(e, PlanEntry::Fixed(_))).count()
    }

    pub fn flexible_count(&self) -> usize {
        self.iter().filter(|(_, _, e)| matches!(e, PlanEntry::Flexible { .. })).count()
    }

    /// Planned commitment value of each entry, fixed or warm.
    pub fn value(&self, g: usize, t: usize) -> Option<bool> {
        self.get(g, t).map(|e| match e {
            PlanEntry::Fixed(b) | PlanEntry::Flexible { warm: b } => b,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub problem: Problem,
    /// Full binary assignment, present when the plan covers every `u`.
    pub warm_start: Option<BTreeMap<usize, f64>>,
}

/// Bound-fixes the plan's fixed commitments and collects warm-start values
/// for the flexible ones. Start-up variables stay free.
pub fn apply_reduction(
    problem: &Problem,
    index: &VariableIndex,
    plan: &ReductionPlan,
) -> Result<ReducedProblem, ScucError> {
    let (ng, nt) = (index.generators(), index.horizon());
    let mut fixed = BTreeMap::new();
    for (g, t, entry) in plan.iter() {
        if g >= ng || t >= nt {
            return Err(ScucError::UnknownPlanEntry { generator: g, period: t + 1 });
        }
        if let PlanEntry::Fixed(on) = entry {
            fixed.insert(index.u[g][t], if on { 1.0 } else { 0.0 });
        }
    }
    let reduced = fix_variables(problem, &fixed)?;

    let complete = (0..ng).all(|g| (0..nt).all(|t| plan.get(g, t).is_some()));
    let warm_start = complete.then(|| {
        let u: Vec<Vec<u8>> =
            (0..ng).map(|g| (0..nt).map(|t| u8::from(plan.value(g, t) == Some(true))).collect()).collect();
        let sched = CommitmentSchedule::from_u(u, &index.initial_on);
        let mut warm = BTreeMap::new();
        for g in 0..ng {
            for t in 0..nt {
                warm.insert(index.u[g][t], f64::from(sched.u[g][t]));
                warm.insert(index.v[g][t], f64::from(sched.v[g][t]));
            }
        }
        warm
    });
    Ok(ReducedProblem { problem: reduced, warm_start })
}
