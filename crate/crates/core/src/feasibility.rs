//! Minimum-flip repair of predicted commitment rows so that they satisfy the
//! minimum up/down rules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::PowerSystem;
use crate::milp::{solve_milp, Clock, MilpError, Relation, SolveOptions};
use crate::scuc::{CommitmentSchedule, ScucOptions};
use crate::Problem;

/// One generator's predicted row with its timing limits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlInstance {
    pub generator: usize,
    pub min_up: usize,
    pub min_down: usize,
    pub row: Vec<u8>,
    pub initial_on: bool,
    /// Leading periods forced to a value by the initial state.
    #[serde(default)]
    pub carry_over: Option<(usize, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlResult {
    pub u: Vec<u8>,
    pub v: Vec<u8>,
    pub flips_up: usize,
    pub flips_down: usize,
    pub solve_time: f64,
    pub iterations: u64,
}

impl FlResult {
    pub fn flips(&self) -> usize {
        self.flips_up + self.flips_down
    }
}

/// The repair MILP: `u = row + up − dn`, at most one flip per period, the
/// min up/down rows on `u` with start-ups `v ≥ u_t − u_{t−1}`, minimizing
/// `Σ up + dn`.
pub fn repair_model(instance: &FlInstance) -> Problem {
    let nt = instance.row.len();
    let mut p = Problem::new(format!("fl[{}]", instance.generator));
    let u: Vec<usize> = (1..=nt).map(|t| p.add_binary(format!("u[{t}]"))).collect();
    let up: Vec<usize> = (1..=nt).map(|t| p.add_binary(format!("up[{t}]"))).collect();
    let dn: Vec<usize> = (1..=nt).map(|t| p.add_binary(format!("dn[{t}]"))).collect();
    let v: Vec<usize> = (1..=nt).map(|t| p.add_binary(format!("v[{t}]"))).collect();
    for t in 0..nt {
        p.add_objective_term(up[t], 1.0);
        p.add_objective_term(dn[t], 1.0);
        p.add_constraint(
            format!("link[{}]", t + 1),
            vec![(u[t], 1.0), (up[t], -1.0), (dn[t], 1.0)],
            Relation::Equal,
            f64::from(instance.row[t]),
        );
        p.add_constraint(format!("one[{}]", t + 1), vec![(up[t], 1.0), (dn[t], 1.0)], Relation::LessEq, 1.0);
        let tt = t + 1;
        if tt + instance.min_down <= nt {
            let mut terms: Vec<(usize, f64)> = (tt..tt + instance.min_down).map(|q| (v[q], 1.0)).collect();
            terms.push((u[t], 1.0));
            p.add_constraint(format!("down[{tt}]"), terms, Relation::LessEq, 1.0);
        }
        if tt >= instance.min_up {
            let mut terms: Vec<(usize, f64)> = (tt - instance.min_up..tt).map(|q| (v[q], 1.0)).collect();
            terms.push((u[t], -1.0));
            p.add_constraint(format!("up[{tt}]"), terms, Relation::LessEq, 0.0);
        }
        if t == 0 {
            let u0 = if instance.initial_on { 1.0 } else { 0.0 };
            p.add_constraint("start[1]", vec![(v[0], 1.0), (u[0], -1.0)], Relation::GreaterEq, -u0);
        } else {
            p.add_constraint(
                format!("start[{tt}]"),
                vec![(v[t], 1.0), (u[t], -1.0), (u[t - 1], 1.0)],
                Relation::GreaterEq,
                0.0,
            );
        }
    }
    if let Some((left, on)) = instance.carry_over {
        for &j in u.iter().take(left) {
            let val = if on { 1.0 } else { 0.0 };
            p.variables[j].lower = val;
            p.variables[j].upper = val;
        }
    }
    p
}

/// Solves the repair MILP for one row. The all-OFF and all-ON rows satisfy
/// the rules, so an optimum always exists unless a carry-over forces the
/// first periods against the rules.
pub fn repair_row(instance: &FlInstance) -> Result<FlResult, MilpError> {
    let nt = instance.row.len();
    let problem = repair_model(instance);
    let sol = solve_milp(&problem, &SolveOptions::default().with_gap(0.0))?;
    if !sol.status.has_solution() {
        return Err(MilpError::NumericalInstability(format!(
            "repair of generator {} found no schedule ({})",
            instance.generator,
            sol.status.as_str()
        )));
    }
    let bit = |j: usize| u8::from(sol.values[j] > 0.5);
    let u: Vec<u8> = (0..nt).map(bit).collect();
    let flips_up = (0..nt).filter(|&t| bit(nt + t) == 1).count();
    let flips_down = (0..nt).filter(|&t| bit(2 * nt + t) == 1).count();
    let v = CommitmentSchedule::from_u(vec![u.clone()], &[instance.initial_on]).v.remove(0);
    Ok(FlResult { u, v, flips_up, flips_down, solve_time: sol.solve_time, iterations: sol.iterations })
}

/// Rows of one sample after the layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairedSample {
    pub schedule: CommitmentSchedule,
    /// `None` for rows skipped as always ON/OFF.
    pub rows: Vec<Option<FlResult>>,
    /// Summed repair effort of the sample, in `clock` units.
    pub time: f64,
}

impl RepairedSample {
    pub fn flips(&self) -> usize {
        self.rows.iter().flatten().map(FlResult::flips).sum()
    }
}

/// Repairs every row of a predicted `u[g][t]` except rows that are constant
/// over the horizon, which pass through unchanged.
pub fn repair_sample(
    labels: &[Vec<u8>],
    system: &PowerSystem,
    options: &ScucOptions,
    clock: Clock,
) -> Result<RepairedSample, MilpError> {
    let mut u = Vec::with_capacity(labels.len());
    let mut rows = Vec::with_capacity(labels.len());
    let mut time = 0.0;
    for (g, row) in labels.iter().enumerate() {
        let constant = row.iter().all(|&x| x == row[0]);
        if constant {
            u.push(row.clone());
            rows.push(None);
            continue;
        }
        let gen = &system.generators[g];
        let inst = FlInstance {
            generator: g,
            min_up: gen.min_up,
            min_down: gen.min_down,
            row: row.clone(),
            initial_on: options.initial_state(g),
            carry_over: options.carry_over(system, g),
        };
        let res = repair_row(&inst)?;
        time += match clock {
            Clock::Work => res.iterations as f64,
            Clock::Wall => res.solve_time,
        };
        u.push(res.u.clone());
        rows.push(Some(res));
    }
    let initial: Vec<bool> = (0..labels.len()).map(|g| options.initial_state(g)).collect();
    Ok(RepairedSample { schedule: CommitmentSchedule::from_u(u, &initial), rows, time })
}

/// [`repair_sample`] over many samples, keyed by sample position.
pub fn repair_batch(
    labels: &[Vec<Vec<u8>>],
    system: &PowerSystem,
    options: &ScucOptions,
    clock: Clock,
) -> Result<BTreeMap<usize, RepairedSample>, MilpError> {
    use rayon::prelude::*;
    let out: Result<Vec<_>, _> =
        labels.par_iter().enumerate().map(|(m, l)| repair_sample(l, system, options, clock).map(|r| (m, r))).collect();
    Ok(out?.into_iter().collect())
}
