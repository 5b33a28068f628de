use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{LpStatus, Tableau};
use super::{relative_gap, MilpError, MilpProblem, MilpSolution, SolveOptions, SolveStatus, VarKind};
use crate::Scalar;

struct Node<T> {
    bound: T,
    depth: usize,
    id: u64,
    fixings: Vec<(usize, bool)>,
    /// Branching that created the node: binary slot, direction, distance
    /// moved from the parent's LP value.
    origin: Option<(usize, bool, T)>,
}

impl<T: Scalar> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Node<T> {}

impl<T: Scalar> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Node<T> {
    // Max-heap order: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent<T> {
    objective: T,
    values: Vec<T>,
}

struct Search<'a, T: Scalar> {
    problem: &'a MilpProblem<T>,
    options: &'a SolveOptions<T>,
    tab: Tableau<T>,
    binaries: Vec<usize>,
    root_bounds: Vec<(T, T)>,
    incumbent: Option<Incumbent<T>>,
    trace: Vec<T>,
    pruned_bound: T,
    /// Per binary slot, `[down, up]` sums of objective gain per unit change
    /// and observation counts.
    pseudocost: Vec<[(T, u32); 2]>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn exact_tolerance(value: T) -> T {
        T::lit(1e-9) * T::one().max(value.abs())
    }

    /// Objective above which a node cannot improve the incumbent enough.
    fn cutoff(&self) -> Option<T> {
        self.incumbent.as_ref().map(|inc| {
            let slack = (self.options.mip_gap * inc.objective.abs().max(T::lit(1e-10)))
                .max(Self::exact_tolerance(inc.objective));
            inc.objective - slack
        })
    }

    fn apply_node_bounds(&mut self, fixings: &[(usize, bool)]) {
        for (&j, &(lo, hi)) in self.binaries.iter().zip(&self.root_bounds) {
            self.tab.set_bounds(j, lo, hi);
        }
        for &(j, up) in fixings {
            let v = if up { T::one() } else { T::zero() };
            self.tab.set_bounds(j, v, v);
        }
    }

    fn has_fractional(&self) -> bool {
        let x = self.tab.values();
        self.binaries.iter().any(|&j| {
            let v = x[j];
            (v - v.floor()).min(v.ceil() - v) > self.options.integrality_tolerance
        })
    }

    fn record_gain(&mut self, origin: Option<(usize, bool, T)>, parent_bound: T, child_bound: T) {
        let Some((slot, up, dist)) = origin else { return };
        if !parent_bound.is_finite() || dist <= T::zero() {
            return;
        }
        let gain = ((child_bound - parent_bound) / dist).max(T::zero());
        let entry = &mut self.pseudocost[slot][usize::from(up)];
        entry.0 += gain;
        entry.1 += 1;
    }

    /// Fractional binary with the best pseudocost product score; unseen
    /// directions borrow the average over all observed ones.
    fn select_branch(&self) -> Option<(usize, T)> {
        let x = self.tab.values();
        let mut avg = [(T::zero(), 0u32); 2];
        for pc in &self.pseudocost {
            for d in 0..2 {
                if pc[d].1 > 0 {
                    avg[d].0 += pc[d].0 / T::lit(f64::from(pc[d].1));
                    avg[d].1 += 1;
                }
            }
        }
        let fallback: Vec<T> =
            avg.iter().map(|&(s, c)| if c > 0 { s / T::lit(f64::from(c)) } else { T::one() }).collect();
        let eps = T::lit(1e-6);
        let mut best: Option<(usize, T, T)> = None;
        for (slot, &j) in self.binaries.iter().enumerate() {
            let v = x[j];
            let down_dist = v - v.floor();
            let up_dist = v.ceil() - v;
            if down_dist.min(up_dist) <= self.options.integrality_tolerance {
                continue;
            }
            let rate = |d: usize| {
                let (s, c) = self.pseudocost[slot][d];
                if c > 0 {
                    s / T::lit(f64::from(c))
                } else {
                    fallback[d]
                }
            };
            let score = (rate(0) * down_dist).max(eps) * (rate(1) * up_dist).max(eps);
            if best.is_none_or(|(_, _, b)| score > b) {
                best = Some((slot, v, score));
            }
        }
        best.map(|(slot, v, _)| (slot, v))
    }

    /// Fixes the binaries at their rounded LP values, re-solves for clean
    /// continuous values and records the point if it improves the incumbent.
    fn try_incumbent(&mut self) -> Result<bool, MilpError> {
        let rounded: Vec<(usize, T)> = self
            .binaries
            .iter()
            .map(|&j| (j, self.tab.values()[j].round()))
            .collect();
        for &(j, v) in &rounded {
            let (lo, hi) = self.tab.bounds(j);
            if v < lo || v > hi {
                return Ok(false);
            }
            self.tab.set_bounds(j, v, v);
        }
        let mut status = self.tab.reoptimize(None)?;
        let mut values = self.tab.values().to_vec();
        if status == LpStatus::Optimal && self.problem.max_violation(&values) > self.options.feasibility_tolerance {
            self.tab.refactor();
            status = self.tab.reoptimize(None)?;
            values = self.tab.values().to_vec();
        }
        if status != LpStatus::Optimal {
            return Ok(false);
        }
        for &(j, v) in &rounded {
            values[j] = v;
        }
        if self.problem.max_violation(&values) > self.options.feasibility_tolerance {
            return Ok(false);
        }
        let objective = self.problem.objective_value(&values);
        let improves = self.incumbent.as_ref().is_none_or(|inc| objective < inc.objective);
        if improves {
            self.trace.push(objective);
            self.incumbent = Some(Incumbent { objective, values });
        }
        Ok(improves)
    }

    fn evaluate_warm_start(&mut self) -> Result<(), MilpError> {
        let Some(warm) = &self.options.warm_start else { return Ok(()) };
        let warm = warm.clone();
        for (&j, &v) in &warm {
            if j >= self.problem.num_variables() {
                continue;
            }
            let (lo, hi) = self.tab.bounds(j);
            if v < lo || v > hi {
                self.apply_node_bounds(&[]);
                return Ok(());
            }
            self.tab.set_bounds(j, v, v);
        }
        if self.tab.reoptimize(None)? == LpStatus::Optimal && !self.has_fractional() {
            self.try_incumbent()?;
        }
        self.apply_node_bounds(&[]);
        Ok(())
    }
}

/// Branch-and-bound over the binary variables of `problem`.
///
/// Branching uses pseudocosts (most fractional until any are observed) and the nearest-rounding child
/// is explored immediately; other open nodes are taken best-bound first
/// (ties: deeper, then older). A warm start is
/// evaluated before the root and installed as incumbent when feasible.
pub fn solve_milp<T: Scalar>(
    problem: &MilpProblem<T>,
    options: &SolveOptions<T>,
) -> Result<MilpSolution<T>, MilpError> {
    let start = Instant::now();
    let tab = Tableau::new(problem)?;
    let binaries: Vec<usize> = problem
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let root_bounds = binaries.iter().map(|&j| tab.bounds(j)).collect();
    let pseudocost = vec![[(T::zero(), 0); 2]; binaries.len()];
    let mut search = Search {
        problem,
        options,
        tab,
        binaries,
        root_bounds,
        incumbent: None,
        trace: Vec::new(),
        pruned_bound: T::infinity(),
        pseudocost,
    };
    search.evaluate_warm_start()?;

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: T::neg_infinity(), depth: 0, id: 0, fixings: Vec::new(), origin: None });
    let mut next_id = 1u64;
    let mut nodes = 0usize;
    let mut limit_hit = false;
    let mut unbounded = false;

    // After branching, the preferred child is solved next so its basis stays
    // close; the search returns to best-bound order when a dive ends.
    let mut dive: Option<Node<T>> = None;
    while let Some(node) = dive.take().or_else(|| heap.pop()) {
        if let Some(cut) = search.cutoff() {
            if node.bound > cut {
                search.pruned_bound = search.pruned_bound.min(node.bound);
                continue;
            }
        }
        let over_time = options.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t);
        let over_nodes = options.node_limit.is_some_and(|n| nodes >= n);
        if over_time || over_nodes {
            search.pruned_bound = search.pruned_bound.min(node.bound);
            limit_hit = true;
            for rest in heap.drain() {
                search.pruned_bound = search.pruned_bound.min(rest.bound);
            }
            break;
        }

        nodes += 1;
        search.apply_node_bounds(&node.fixings);
        let cutoff = search.cutoff();
        match search.tab.reoptimize(cutoff)? {
            LpStatus::Infeasible => continue,
            LpStatus::Cutoff => {
                search.pruned_bound = search.pruned_bound.min(search.tab.objective());
                continue;
            }
            LpStatus::Unbounded => {
                unbounded = true;
                break;
            }
            LpStatus::Optimal => {}
        }
        let bound = search.tab.objective();
        search.record_gain(node.origin, node.bound, bound);
        if let Some(cut) = cutoff {
            if bound > cut {
                search.pruned_bound = search.pruned_bound.min(bound);
                continue;
            }
        }
        match search.select_branch() {
            None => {
                search.try_incumbent()?;
            }
            Some((slot, v)) => {
                let j = search.binaries[slot];
                let up_first = v >= T::lit(0.5);
                let dist = |up: bool| if up { v.ceil() - v } else { v - v.floor() };
                let child = |up: bool, id: u64| {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, up));
                    Node { bound, depth: node.depth + 1, id, fixings, origin: Some((slot, up, dist(up))) }
                };
                heap.push(child(!up_first, next_id));
                dive = Some(child(up_first, next_id + 1));
                next_id += 2;
            }
        }
    }

    let time = start.elapsed().as_secs_f64();
    let iterations = search.tab.iterations;
    if unbounded {
        let mut s = MilpSolution::without_incumbent(SolveStatus::Unbounded, nodes, time, iterations);
        s.objective = T::neg_infinity();
        s.bound = T::neg_infinity();
        return Ok(s);
    }
    let Some(inc) = search.incumbent else {
        let status = if limit_hit { SolveStatus::LimitReached } else { SolveStatus::Infeasible };
        let mut s = MilpSolution::without_incumbent(status, nodes, time, iterations);
        if limit_hit {
            s.bound = search.pruned_bound;
        }
        return Ok(s);
    };
    let bound = search.pruned_bound.min(inc.objective);
    let gap = relative_gap(inc.objective, bound);
    let status = if limit_hit {
        SolveStatus::LimitReached
    } else if inc.objective - bound <= Search::<T>::exact_tolerance(inc.objective) {
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleGapMet
    };
    Ok(MilpSolution {
        status,
        values: inc.values,
        objective: inc.objective,
        bound,
        gap,
        nodes_explored: nodes,
        solve_time: time,
        iterations,
        incumbent_trace: search.trace,
        certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::milp::{fix_variables, solve_lp, Relation};

    fn two_binaries() -> MilpProblem<f64> {
        let mut p = MilpProblem::new("b2");
        let x = p.add_binary("x");
        let y = p.add_binary("y");
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::GreaterEq, 1.5);
        p.add_objective_term(x, 1.0);
        p.add_objective_term(y, 1.0);
        p
    }

    #[test]
    fn covering_needs_both_binaries() {
        let s = solve_milp(&two_binaries(), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.objective, 2.0);
        assert_eq!(s.values, vec![1.0, 1.0]);
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn fully_fixed_matches_lp() {
        let p = two_binaries();
        let fixed = fix_variables(&p, &BTreeMap::from([(0, 1.0), (1, 1.0)])).unwrap();
        let milp = solve_milp(&fixed, &SolveOptions::default()).unwrap();
        let lp = solve_lp(&fixed).unwrap();
        assert_eq!(milp.objective, lp.objective);
        assert_eq!(milp.nodes_explored, 1);
    }

    #[test]
    fn infeasible_milp() {
        let mut p = two_binaries();
        p.add_constraint("cap", vec![(0, 1.0), (1, 1.0)], Relation::LessEq, 1.0);
        let s = solve_milp(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.values.is_empty());
    }

    #[test]
    fn knapsack_with_warm_start() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5
        let mut p = MilpProblem::<f64>::new("knap");
        let a = p.add_binary("a");
        let b = p.add_binary("b");
        let c = p.add_binary("c");
        p.add_constraint("w", vec![(a, 2.0), (b, 3.0), (c, 1.0)], Relation::LessEq, 5.0);
        for (j, v) in [(a, 5.0), (b, 4.0), (c, 3.0)] {
            p.add_objective_term(j, -v);
        }
        let cold = solve_milp(&p, &SolveOptions::default()).unwrap();
        // {a, b} weighs 5 and earns 9; {a, c} earns 8; {a, b, c} is too heavy.
        assert_eq!(cold.objective, -9.0);
        let warm = BTreeMap::from([(a, 1.0), (b, 0.0), (c, 1.0)]);
        let s = solve_milp(&p, &SolveOptions::default().with_warm_start(warm)).unwrap();
        assert_eq!(s.objective, -9.0);
        assert_eq!(s.incumbent_trace[0], -8.0);
    }

    #[test]
    fn node_limit_reports_limit() {
        let mut p = MilpProblem::<f64>::new("lim");
        let vars: Vec<usize> = (0..6).map(|i| p.add_binary(format!("x{i}"))).collect();
        p.add_constraint("odd", vars.iter().map(|&j| (j, 2.0)).collect(), Relation::Equal, 5.0);
        let opts = SolveOptions { node_limit: Some(1), ..SolveOptions::default() };
        let s = solve_milp(&p, &opts).unwrap();
        assert_eq!(s.status, SolveStatus::LimitReached);
    }
}
