//! Shared test oracles and instance generators.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucml::milp::{fix_variables, solve_lp, MilpProblem, Relation, VarKind};

/// Random MILP with a planted feasible point and bounded continuous part.
pub fn random_milp(seed: u64, max_bin: usize, max_cont: usize) -> MilpProblem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.gen_range(1..=max_bin);
    let nc = rng.gen_range(0..=max_cont);
    let mut p = MilpProblem::new(format!("rand{seed}"));
    let mut point = Vec::new();
    for i in 0..nb {
        let j = p.add_binary(format!("b{i}"));
        p.add_objective_term(j, rng.gen_range(-10.0..10.0));
        point.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    for i in 0..nc {
        let ub = rng.gen_range(1.0..10.0);
        let j = p.add_continuous(format!("x{i}"), 0.0, ub);
        p.add_objective_term(j, rng.gen_range(-5.0..5.0));
        point.push(rng.gen_range(0.0..ub));
    }
    let n = nb + nc;
    let rows = rng.gen_range(2..=8);
    for r in 0..rows {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, (rng.gen_range(-5.0f64..5.0) * 4.0).round() / 4.0));
            }
        }
        if terms.is_empty() {
            terms.push((rng.gen_range(0..n), 1.0));
        }
        let act: f64 = terms.iter().map(|&(j, a)| a * point[j]).sum();
        let slack = rng.gen_range(0.0..3.0);
        let (rel, rhs) = match rng.gen_range(0..5) {
            0 | 1 => (Relation::LessEq, act + slack),
            2 | 3 => (Relation::GreaterEq, act - slack),
            _ if nc > 0 => (Relation::Equal, act),
            _ => (Relation::LessEq, act),
        };
        p.add_constraint(format!("r{r}"), terms, rel, rhs);
    }
    p
}

/// Minimum over all binary assignments of the LP over the continuous part.
pub fn enumerate_milp(p: &MilpProblem<f64>) -> Option<f64> {
    let bins: Vec<usize> = (0..p.num_variables()).filter(|&j| p.variables[j].kind == VarKind::Binary).collect();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << bins.len()) {
        let fix: BTreeMap<usize, f64> =
            bins.iter().enumerate().map(|(k, &j)| (j, ((mask >> k) & 1) as f64)).collect();
        let Ok(fixed) = fix_variables(p, &fix) else { continue };
        let s = solve_lp(&fixed).unwrap();
        if s.status.has_solution() {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}

/// Solves a tiny bounded LP by enumerating every vertex: each choice of `n`
/// tight constraints among rows and finite bounds gives a candidate point.
pub fn vertex_enumeration_lp(p: &MilpProblem<f64>) -> Option<f64> {
    let n = p.num_variables();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &p.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.terms {
            a[j] += v;
        }
        planes.push((a, c.rhs));
    }
    for (j, v) in p.variables.iter().enumerate() {
        for b in [v.lower, v.upper] {
            if b.is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                planes.push((a, b));
            }
        }
    }
    let k = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_dense(&idx.iter().map(|&i| planes[i].clone()).collect::<Vec<_>>()) {
            if p.max_violation(&x) <= 1e-9 {
                let v = p.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_dense(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn desk(name: &str) -> (ucml::grid::PowerSystem, ucml::grid::LoadProfile) {
    let sys = ucml::grid::load_system(data_path(&format!("{name}.toml"))).unwrap();
    let prof = ucml::grid::load_profile(data_path(&format!("{name}_load.csv")), &sys).unwrap();
    (sys, prof)
}

/// Cheapest SCUC cost over every commitment matrix: schedules breaking the
/// min up/down rules are skipped, the rest get their optimal dispatch LP.
pub fn scuc_brute_force(
    system: &ucml::grid::PowerSystem,
    profile: &ucml::grid::LoadProfile,
    options: &ucml::scuc::ScucOptions,
) -> Option<f64> {
    use ucml::scuc::{build_scuc, check_min_updown, CommitmentSchedule};
    let (problem, index) = build_scuc(system, profile, options).unwrap();
    let (ng, nt) = (index.generators(), index.horizon());
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << (ng * nt)) {
        let u: Vec<Vec<u8>> =
            (0..ng).map(|g| (0..nt).map(|t| ((mask >> (g * nt + t)) & 1) as u8).collect()).collect();
        let sched = CommitmentSchedule::from_u(u, &index.initial_on);
        if !check_min_updown(&sched, system, options).is_empty() {
            continue;
        }
        let mut fix = BTreeMap::new();
        for g in 0..ng {
            for t in 0..nt {
                fix.insert(index.u[g][t], f64::from(sched.u[g][t]));
                fix.insert(index.v[g][t], f64::from(sched.v[g][t]));
            }
        }
        let Ok(lp) = fix_variables(&problem, &fix) else { continue };
        let s = solve_lp(&lp).unwrap();
        if s.status.has_solution() {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}
