use serde::{Deserialize, Serialize};

use super::ScucError;
use crate::grid::{LoadProfile, PowerSystem};
use crate::milp::Relation;
use crate::Problem;

/// Initial conditions and mode switches for [`build_scuc`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScucOptions {
    /// Commitment at t = 0 per generator; empty means all OFF.
    #[serde(default)]
    pub initial_on: Vec<bool>,
    /// Periods already spent in the initial state. `None` (or an empty
    /// vector) means long enough that no carry-over min-up/down binds.
    #[serde(default)]
    pub initial_duration: Vec<Option<usize>>,
    /// Output at t = 0 per generator in MW; empty means 0.
    #[serde(default)]
    pub initial_dispatch: Vec<f64>,
    /// Use every scenario of the system with its probability; otherwise a
    /// single scenario with renewables ignored.
    #[serde(default)]
    pub stochastic: bool,
}

impl ScucOptions {
    pub fn stochastic() -> Self {
        Self { stochastic: true, ..Self::default() }
    }

    pub fn initial_state(&self, g: usize) -> bool {
        self.initial_on.get(g).copied().unwrap_or(false)
    }

    pub fn initial_output(&self, g: usize) -> f64 {
        self.initial_dispatch.get(g).copied().unwrap_or(0.0)
    }

    /// Periods at the start of the horizon whose commitment is forced by the
    /// initial state, with the forced value.
    pub fn carry_over(&self, system: &PowerSystem, g: usize) -> Option<(usize, bool)> {
        let done = self.initial_duration.get(g).copied().flatten()?;
        let gen = &system.generators[g];
        let on = self.initial_state(g);
        let need = if on { gen.min_up } else { gen.min_down };
        let left = need.saturating_sub(done).min(system.horizon);
        (left > 0).then_some((left, on))
    }

    pub fn validate(&self, system: &PowerSystem) -> Result<(), ScucError> {
        let g = system.num_generators();
        for (name, len) in [
            ("initial_on", self.initial_on.len()),
            ("initial_duration", self.initial_duration.len()),
            ("initial_dispatch", self.initial_dispatch.len()),
        ] {
            if len != 0 && len != g {
                return Err(ScucError::Options(format!("{name} has {len} entries for {g} generators")));
            }
        }
        for (k, &p) in self.initial_dispatch.iter().enumerate() {
            let gen = &system.generators[k];
            let on = self.initial_state(k);
            if p < 0.0 || p > gen.p_max || (!on && p != 0.0) {
                return Err(ScucError::Options(format!("initial dispatch {p} of generator {} is inconsistent", gen.id)));
            }
        }
        Ok(())
    }
}

/// Variable ids of the SCUC model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableIndex {
    /// `[g][t]`
    pub u: Vec<Vec<usize>>,
    /// `[g][t]`
    pub v: Vec<Vec<usize>>,
    /// `[g][t][s]`
    pub p: Vec<Vec<Vec<usize>>>,
    /// `[g][t][s]`
    pub r: Vec<Vec<Vec<usize>>>,
    /// `[k][t][s]`
    pub flow: Vec<Vec<Vec<usize>>>,
    /// `[n][t][s]`
    pub theta: Vec<Vec<Vec<usize>>>,
    pub scenarios: usize,
    pub probabilities: Vec<f64>,
    pub initial_on: Vec<bool>,
}

impl VariableIndex {
    pub fn generators(&self) -> usize {
        self.u.len()
    }

    pub fn horizon(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    pub fn all_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.u.iter().chain(&self.v).flatten().copied().collect();
        for block in [&self.p, &self.r, &self.flow, &self.theta] {
            ids.extend(block.iter().flatten().flatten().copied());
        }
        ids
    }
}

/// Rows per constraint family; families 4 (lower half), 13 and 15 are
/// realised as variable bounds and have no rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FamilyCounts {
    pub e2: usize,
    pub e3: usize,
    pub e4: usize,
    pub e5: usize,
    pub e6: usize,
    pub e7: usize,
    pub e8: usize,
    pub e9: usize,
    pub e10: usize,
    pub e12: usize,
    pub e14: usize,
}

impl FamilyCounts {
    pub fn total(&self) -> usize {
        self.e2 + self.e3 + self.e4 + self.e5 + self.e6 + self.e7 + self.e8 + self.e9 + self.e10 + self.e12 + self.e14
    }
}

/// Counts rows of `problem` by the family prefix of their names.
pub fn family_counts(problem: &Problem) -> FamilyCounts {
    let mut c = FamilyCounts::default();
    for row in &problem.constraints {
        let family = row.name.split('[').next().unwrap_or("");
        let slot = match family {
            "e2" => &mut c.e2,
            "e3" => &mut c.e3,
            "e4" => &mut c.e4,
            "e5" => &mut c.e5,
            "e6" => &mut c.e6,
            "e7" => &mut c.e7,
            "e8" => &mut c.e8,
            "e9" => &mut c.e9,
            "e10" => &mut c.e10,
            "e12" => &mut c.e12,
            "e14" => &mut c.e14,
            _ => continue,
        };
        *slot += 1;
    }
    c
}

/// Builds the SCUC (or, with `options.stochastic`, the SSCUC) MILP.
///
/// Rows follow the model's constraint families and are named `e<family>[..]`:
/// generation limits (2, 3), reserve ramp (4), largest-unit reserve (5),
/// hourly ramping (6, 7), minimum up/down (8, 9), start-up definition (10),
/// DC flow (12) and nodal balance (14). Reserve non-negativity, thermal
/// limits (13) and the reference angle (15) are variable bounds.
pub fn build_scuc(
    system: &PowerSystem,
    profile: &LoadProfile,
    options: &ScucOptions,
) -> Result<(Problem, VariableIndex), ScucError> {
    profile.validate_for(system)?;
    options.validate(system)?;
    let ng = system.num_generators();
    let nt = system.horizon;
    let (ns, probs) = if options.stochastic {
        (system.num_scenarios(), system.scenario_probabilities.clone())
    } else {
        (1, vec![1.0])
    };
    let mut p = Problem::new(if options.stochastic { "sscuc" } else { "scuc" });
    let gid = |g: usize| system.generators[g].id;

    let mut u = vec![Vec::with_capacity(nt); ng];
    let mut v = vec![Vec::with_capacity(nt); ng];
    for g in 0..ng {
        let forced = options.carry_over(system, g);
        for t in 0..nt {
            let j = p.add_binary(format!("u[{},{}]", gid(g), t + 1));
            if let Some((left, on)) = forced {
                if t < left {
                    let val = if on { 1.0 } else { 0.0 };
                    p.variables[j].lower = val;
                    p.variables[j].upper = val;
                }
            }
            u[g].push(j);
        }
        for t in 0..nt {
            v[g].push(p.add_binary(format!("v[{},{}]", gid(g), t + 1)));
        }
    }
    let mut pv = vec![vec![Vec::with_capacity(ns); nt]; ng];
    let mut rv = vec![vec![Vec::with_capacity(ns); nt]; ng];
    for g in 0..ng {
        let gen = &system.generators[g];
        for t in 0..nt {
            for s in 0..ns {
                pv[g][t].push(p.add_continuous(format!("P[{},{},{}]", gid(g), t + 1, s + 1), 0.0, gen.p_max));
                rv[g][t].push(p.add_continuous(format!("r[{},{},{}]", gid(g), t + 1, s + 1), 0.0, gen.ramp_10min));
            }
        }
    }
    let mut flow = vec![vec![Vec::with_capacity(ns); nt]; system.num_lines()];
    for (k, line) in system.lines.iter().enumerate() {
        for t in 0..nt {
            for s in 0..ns {
                flow[k][t].push(p.add_continuous(
                    format!("F[{},{},{}]", line.id, t + 1, s + 1),
                    -line.flow_limit,
                    line.flow_limit,
                ));
            }
        }
    }
    let reference = system.reference_index();
    let mut theta = vec![vec![Vec::with_capacity(ns); nt]; system.num_buses()];
    for (n, bus) in system.buses.iter().enumerate() {
        for t in 0..nt {
            for s in 0..ns {
                let (lo, hi) = if n == reference { (0.0, 0.0) } else { (f64::NEG_INFINITY, f64::INFINITY) };
                theta[n][t].push(p.add_continuous(format!("theta[{},{},{}]", bus.id, t + 1, s + 1), lo, hi));
            }
        }
    }

    // Objective.
    for g in 0..ng {
        let gen = &system.generators[g];
        for t in 0..nt {
            if gen.cost_no_load != 0.0 {
                p.add_objective_term(u[g][t], gen.cost_no_load);
            }
            if gen.cost_startup != 0.0 {
                p.add_objective_term(v[g][t], gen.cost_startup);
            }
            for s in 0..ns {
                let c = probs[s] * gen.cost_linear;
                if c != 0.0 {
                    p.add_objective_term(pv[g][t][s], c);
                }
            }
        }
    }

    for g in 0..ng {
        let gen = &system.generators[g];
        let u0 = if options.initial_state(g) { 1.0 } else { 0.0 };
        let p0 = options.initial_output(g);
        for t in 0..nt {
            let tag = |s: usize| format!("[{},{},{}]", gid(g), t + 1, s + 1);
            for s in 0..ns {
                let (pj, rj, uj, vj) = (pv[g][t][s], rv[g][t][s], u[g][t], v[g][t]);
                p.add_constraint(format!("e2{}", tag(s)), vec![(pj, 1.0), (uj, -gen.p_min)], Relation::GreaterEq, 0.0);
                p.add_constraint(
                    format!("e3{}", tag(s)),
                    vec![(pj, 1.0), (rj, 1.0), (uj, -gen.p_max)],
                    Relation::LessEq,
                    0.0,
                );
                p.add_constraint(format!("e4{}", tag(s)), vec![(rj, 1.0), (uj, -gen.ramp_10min)], Relation::LessEq, 0.0);
                // Σ_q r_q ≥ P_g + r_g; the r_g terms cancel.
                let mut terms: Vec<(usize, f64)> =
                    (0..ng).filter(|&q| q != g).map(|q| (rv[q][t][s], 1.0)).collect();
                terms.push((pj, -1.0));
                p.add_constraint(format!("e5{}", tag(s)), terms, Relation::GreaterEq, 0.0);

                // Ramping, with t = 0 quantities moved to the right-hand side.
                let mut e6 = vec![(pj, 1.0), (vj, -gen.ramp_startup)];
                let mut e7 = vec![(pj, -1.0), (uj, gen.ramp_shutdown - gen.ramp_hourly), (vj, -gen.ramp_shutdown)];
                let (mut rhs6, mut rhs7) = (0.0, 0.0);
                if t == 0 {
                    rhs6 += p0 + gen.ramp_hourly * u0;
                    rhs7 += gen.ramp_shutdown * u0 - p0;
                } else {
                    e6.push((pv[g][t - 1][s], -1.0));
                    e6.push((u[g][t - 1], -gen.ramp_hourly));
                    e7.push((pv[g][t - 1][s], 1.0));
                    e7.push((u[g][t - 1], -gen.ramp_shutdown));
                }
                p.add_constraint(format!("e6{}", tag(s)), e6, Relation::LessEq, rhs6);
                p.add_constraint(format!("e7{}", tag(s)), e7, Relation::LessEq, rhs7);
            }
            let tt = t + 1;
            let name = |f: &str| format!("{f}[{},{}]", gid(g), tt);
            if tt >= gen.min_up {
                let mut terms: Vec<(usize, f64)> = (tt - gen.min_up..tt).map(|q| (v[g][q], 1.0)).collect();
                terms.push((u[g][t], -1.0));
                p.add_constraint(name("e8"), terms, Relation::LessEq, 0.0);
            }
            if tt + gen.min_down <= nt {
                let mut terms: Vec<(usize, f64)> = (tt..tt + gen.min_down).map(|q| (v[g][q], 1.0)).collect();
                terms.push((u[g][t], 1.0));
                p.add_constraint(name("e9"), terms, Relation::LessEq, 1.0);
            }
            if t == 0 {
                p.add_constraint(name("e10"), vec![(v[g][0], 1.0), (u[g][0], -1.0)], Relation::GreaterEq, -u0);
            } else {
                p.add_constraint(
                    name("e10"),
                    vec![(v[g][t], 1.0), (u[g][t], -1.0), (u[g][t - 1], 1.0)],
                    Relation::GreaterEq,
                    0.0,
                );
            }
        }
    }

    for (k, line) in system.lines.iter().enumerate() {
        let from = system.bus_index(line.from_bus).expect("validated");
        let to = system.bus_index(line.to_bus).expect("validated");
        let b = system.base_mva * line.susceptance;
        for t in 0..nt {
            for s in 0..ns {
                p.add_constraint(
                    format!("e12[{},{},{}]", line.id, t + 1, s + 1),
                    vec![(flow[k][t][s], 1.0), (theta[from][t][s], -b), (theta[to][t][s], b)],
                    Relation::Equal,
                    0.0,
                );
            }
        }
    }

    for (n, bus) in system.buses.iter().enumerate() {
        let gens: Vec<usize> = (0..ng).filter(|&g| system.generator_bus(g) == n).collect();
        let inc = system.incoming(n);
        let out = system.outgoing(n);
        for t in 0..nt {
            for s in 0..ns {
                let mut terms: Vec<(usize, f64)> = gens.iter().map(|&g| (pv[g][t][s], 1.0)).collect();
                terms.extend(inc.iter().map(|&k| (flow[k][t][s], 1.0)));
                terms.extend(out.iter().map(|&k| (flow[k][t][s], -1.0)));
                let rhs = if options.stochastic { profile.net_load(system, n, t, s) } else { profile.demand[n][t] };
                p.add_constraint(format!("e14[{},{},{}]", bus.id, t + 1, s + 1), terms, Relation::Equal, rhs);
            }
        }
    }

    let initial_on = (0..ng).map(|g| options.initial_state(g)).collect();
    let index = VariableIndex { u, v, p: pv, r: rv, flow, theta, scenarios: ns, probabilities: probs, initial_on };
    Ok((p, index))
}
