use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{build_scuc, ScucError, ScucOptions, VariableIndex};
use crate::grid::{LoadProfile, PowerSystem};
use crate::milp::{fix_variables, solve_milp, MilpError, SolveOptions, SolveStatus};
use crate::Solution;

/// Binary commitment `u[g][t]` with its start-up matrix `v[g][t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentSchedule {
    pub u: Vec<Vec<u8>>,
    pub v: Vec<Vec<u8>>,
}

impl CommitmentSchedule {
    /// Derives the smallest start-up matrix compatible with `u`.
    pub fn from_u(u: Vec<Vec<u8>>, initial_on: &[bool]) -> Self {
        let v = u
            .iter()
            .enumerate()
            .map(|(g, row)| startups(row, initial_on.get(g).copied().unwrap_or(false)))
            .collect();
        Self { u, v }
    }

    pub fn all(generators: usize, periods: usize, on: bool, initial_on: &[bool]) -> Self {
        Self::from_u(vec![vec![u8::from(on); periods]; generators], initial_on)
    }

    pub fn generators(&self) -> usize {
        self.u.len()
    }

    pub fn periods(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    pub fn is_on(&self, g: usize, t: usize) -> bool {
        self.u[g][t] == 1
    }

    /// Row-major `u` as floats, the training target layout.
    pub fn flat(&self) -> Vec<f64> {
        self.u.iter().flatten().map(|&x| f64::from(x)).collect()
    }

    /// Whether `v` satisfies `v_t ≥ u_t − u_{t−1}`.
    pub fn startups_consistent(&self, initial_on: &[bool]) -> bool {
        self.u.iter().zip(&self.v).enumerate().all(|(g, (u, v))| {
            let mut prev = i16::from(initial_on.get(g).copied().unwrap_or(false));
            u.iter().zip(v).all(|(&ut, &vt)| {
                let ok = i16::from(vt) >= i16::from(ut) - prev;
                prev = i16::from(ut);
                ok
            })
        })
    }
}

fn startups(row: &[u8], initial_on: bool) -> Vec<u8> {
    let mut prev = u8::from(initial_on);
    row.iter()
        .map(|&x| {
            let v = u8::from(x == 1 && prev == 0);
            prev = x;
            v
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    MinUp,
    MinDown,
    /// A period forced by the initial state holds the other value.
    CarryOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpDownViolation {
    pub generator: usize,
    /// 1-based period.
    pub period: usize,
    pub kind: ViolationKind,
}

/// Checks one commitment row against the minimum up/down rules with start-ups
/// derived from the row itself. Returns `(period, kind)` pairs, 1-based.
pub fn check_row(row: &[u8], min_up: usize, min_down: usize, initial_on: bool) -> Vec<(usize, ViolationKind)> {
    let v = startups(row, initial_on);
    let nt = row.len();
    let mut out = Vec::new();
    for t in 1..=nt {
        if t >= min_up {
            let started: u32 = (t - min_up..t).map(|q| u32::from(v[q])).sum();
            if started > u32::from(row[t - 1]) {
                out.push((t, ViolationKind::MinUp));
            }
        }
        if t + min_down <= nt {
            let started: u32 = (t..t + min_down).map(|q| u32::from(v[q])).sum();
            if started > 1 - u32::from(row[t - 1]) {
                out.push((t, ViolationKind::MinDown));
            }
        }
    }
    out
}

/// Every (generator, period) where the minimum up/down rules fail for
/// `schedule`; empty iff the schedule is feasible for them.
pub fn check_min_updown(
    schedule: &CommitmentSchedule,
    system: &PowerSystem,
    options: &ScucOptions,
) -> Vec<UpDownViolation> {
    let mut out = Vec::new();
    for (g, gen) in system.generators.iter().enumerate() {
        let row = &schedule.u[g];
        if let Some((left, on)) = options.carry_over(system, g) {
            for (t, &x) in row.iter().enumerate().take(left) {
                if (x == 1) != on {
                    out.push(UpDownViolation { generator: g, period: t + 1, kind: ViolationKind::CarryOver });
                }
            }
        }
        for (period, kind) in check_row(row, gen.min_up, gen.min_down, options.initial_state(g)) {
            out.push(UpDownViolation { generator: g, period, kind });
        }
    }
    out
}

/// A solved SCUC unpacked by physical quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extracted {
    pub schedule: CommitmentSchedule,
    /// `[g][t][s]` MW
    pub dispatch: Vec<Vec<Vec<f64>>>,
    /// `[g][t][s]` MW
    pub reserves: Vec<Vec<Vec<f64>>>,
    /// `[k][t][s]` MW
    pub flows: Vec<Vec<Vec<f64>>>,
    /// `[n][t][s]` rad
    pub angles: Vec<Vec<Vec<f64>>>,
    pub objective: f64,
}

pub fn extract_schedule(solution: &Solution, index: &VariableIndex) -> Result<Extracted, ScucError> {
    if !solution.status.has_solution() {
        return Err(ScucError::NoSolution(solution.status.as_str()));
    }
    let x = &solution.values;
    let round = |ids: &Vec<Vec<usize>>| -> Vec<Vec<u8>> {
        ids.iter().map(|row| row.iter().map(|&j| u8::from(x[j] > 0.5)).collect()).collect()
    };
    let grab = |ids: &Vec<Vec<Vec<usize>>>| -> Vec<Vec<Vec<f64>>> {
        ids.iter().map(|a| a.iter().map(|b| b.iter().map(|&j| x[j]).collect()).collect()).collect()
    };
    Ok(Extracted {
        schedule: CommitmentSchedule { u: round(&index.u), v: round(&index.v) },
        dispatch: grab(&index.p),
        reserves: grab(&index.r),
        flows: grab(&index.flow),
        angles: grab(&index.theta),
        objective: solution.objective,
    })
}

/// Optimal dispatch of a fixed commitment: builds the model, fixes every
/// `u` and `v` to `schedule` and solves the remaining LP.
pub fn evaluate_schedule(
    system: &PowerSystem,
    profile: &LoadProfile,
    options: &ScucOptions,
    schedule: &CommitmentSchedule,
) -> Result<Solution, ScucError> {
    let (problem, index) = build_scuc(system, profile, options)?;
    let mut fixed = BTreeMap::new();
    for g in 0..index.generators() {
        for t in 0..index.horizon() {
            fixed.insert(index.u[g][t], f64::from(schedule.u[g][t]));
            fixed.insert(index.v[g][t], f64::from(schedule.v[g][t]));
        }
    }
    let lp = match fix_variables(&problem, &fixed) {
        Ok(p) => p,
        // A schedule contradicting a carry-over fixing has no dispatch.
        Err(MilpError::FixingOutOfBounds { .. }) => {
            return Ok(Solution::without_incumbent(SolveStatus::Infeasible, 0, 0.0, 0));
        }
        Err(e) => return Err(e.into()),
    };
    Ok(solve_milp(&lp, &SolveOptions::default())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn startups_follow_rises() {
        let s = CommitmentSchedule::from_u(vec![vec![1, 1, 0, 1], vec![0, 1, 1, 0]], &[true, false]);
        assert_eq!(s.v, vec![vec![0, 0, 0, 1], vec![0, 1, 0, 0]]);
        assert!(s.startups_consistent(&[true, false]));
        assert!(!s.startups_consistent(&[false, false]));
    }

    #[test]
    fn short_run_flags_min_up() {
        let v = check_row(&[0, 1, 0, 0, 0], 3, 1, false);
        assert_eq!(v, vec![(3, ViolationKind::MinUp), (4, ViolationKind::MinUp)]);
        assert!(check_row(&[0, 0, 0, 0, 0], 3, 3, false).is_empty());
        assert!(check_row(&[0, 1, 1, 1, 0], 3, 1, false).is_empty());
    }

    #[test]
    fn short_gap_flags_min_down() {
        // On at t = 1, restarting at t = 3 with DT = 2.
        let v = check_row(&[1, 0, 1, 1], 1, 2, true);
        assert_eq!(v, vec![(1, ViolationKind::MinDown)]);
        assert!(check_row(&[1, 0, 0, 1], 1, 2, true).is_empty());
    }
}
