//! Bounded-variable simplex on a dense short tableau.
//!
//! Every row `i` gets a logical variable `s_i = a_i·x` whose bounds encode the
//! relation, so the system is homogeneous: each basic variable is a linear
//! combination of the nonbasic ones, `x_B = T·x_N`. The last tableau row holds
//! the reduced costs. Nonbasic variables sit at one of their bounds (or at 0
//! when free).
//!
//! The same tableau is reused across branch-and-bound nodes: bounds change
//! between solves and [`Tableau::reoptimize`] picks dual simplex when the
//! current basis is still dual feasible and composite primal simplex
//! otherwise.

use serde::{Deserialize, Serialize};

use super::problem::{MilpProblem, Relation};
use super::MilpError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Dual simplex proved the node objective exceeds the cutoff.
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    Fixed,
    Free,
}

/// Reduced costs and basis statuses of the structural variables at
/// simplex termination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LpCertificate<T: Scalar> {
    pub reduced_costs: Vec<T>,
    pub status: Vec<BasisStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Row(usize),
    Col(usize),
}

const STALL_LIMIT: usize = 60;
const REFACTOR_EVERY: usize = 1500;

pub(crate) struct Tableau<T: Scalar> {
    n: usize,
    m: usize,
    /// (m + 1) × n, row-major; row `m` holds reduced costs.
    t: Vec<T>,
    row_var: Vec<usize>,
    col_var: Vec<usize>,
    pos: Vec<Pos>,
    lo: Vec<T>,
    hi: Vec<T>,
    x: Vec<T>,
    cost: Vec<T>,
    rows: Vec<Vec<(usize, T)>>,
    /// Set when an empty row has an unsatisfiable right-hand side.
    trivially_infeasible: bool,
    pub iterations: u64,
    since_refactor: usize,
    /// Primal feasibility tolerance, scaled by the bound magnitude.
    tol: T,
    /// Smallest usable pivot element.
    piv_tol: T,
    /// Reduced-cost tolerance, scaled by the largest cost.
    dual_tol: T,
    /// Basic values were updated incrementally since the last full pass.
    stale: bool,
    scratch: Vec<(usize, T)>,
    row_buf: Vec<T>,
}

impl<T: Scalar> Tableau<T> {
    pub fn new(problem: &MilpProblem<T>) -> Result<Self, MilpError> {
        problem.validate()?;
        let n = problem.num_variables();
        let mut rows = Vec::new();
        let mut slack_lo = Vec::new();
        let mut slack_hi = Vec::new();
        let mut trivially_infeasible = false;
        for c in &problem.constraints {
            let mut dense: Vec<(usize, T)> = Vec::with_capacity(c.terms.len());
            for &(j, a) in &c.terms {
                match dense.iter_mut().find(|(k, _)| *k == j) {
                    Some(entry) => entry.1 += a,
                    None => dense.push((j, a)),
                }
            }
            dense.retain(|&(_, a)| a != T::zero());
            if dense.is_empty() {
                let zero = T::zero();
                let ok = match c.relation {
                    Relation::LessEq => zero <= c.rhs,
                    Relation::GreaterEq => zero >= c.rhs,
                    Relation::Equal => c.rhs == zero,
                };
                trivially_infeasible |= !ok;
                continue;
            }
            let (lo, hi) = match c.relation {
                Relation::LessEq => (T::neg_infinity(), c.rhs),
                Relation::GreaterEq => (c.rhs, T::infinity()),
                Relation::Equal => (c.rhs, c.rhs),
            };
            rows.push(dense);
            slack_lo.push(lo);
            slack_hi.push(hi);
        }
        let m = rows.len();
        let mut lo: Vec<T> = problem.variables.iter().map(|v| v.lower).collect();
        let mut hi: Vec<T> = problem.variables.iter().map(|v| v.upper).collect();
        lo.extend(slack_lo);
        hi.extend(slack_hi);
        let mut cost = problem.objective_dense();
        cost.resize(n + m, T::zero());
        let cost_scale = cost.iter().fold(T::one(), |a, &c| a.max(c.abs()));
        let tol = T::pivot_tolerance();

        let mut tab = Self {
            n,
            m,
            t: Vec::new(),
            row_var: Vec::new(),
            col_var: Vec::new(),
            pos: Vec::new(),
            lo,
            hi,
            x: vec![T::zero(); n + m],
            cost,
            rows,
            trivially_infeasible,
            iterations: 0,
            since_refactor: 0,
            tol,
            piv_tol: T::epsilon().sqrt() * T::lit(5.0),
            dual_tol: tol * cost_scale,
            stale: false,
            scratch: Vec::new(),
            row_buf: Vec::new(),
        };
        tab.reset_to_slack_basis();
        for j in 0..n {
            tab.x[j] = tab.default_position(j);
        }
        Ok(tab)
    }

    fn reset_to_slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.t = vec![T::zero(); (m + 1) * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                self.t[i * n + j] = a;
            }
        }
        for j in 0..n {
            self.t[m * n + j] = self.cost[j];
        }
        self.row_var = (n..n + m).collect();
        self.col_var = (0..n).collect();
        self.pos = (0..n).map(Pos::Col).chain((0..m).map(Pos::Row)).collect();
        self.since_refactor = 0;
    }

    fn default_position(&self, j: usize) -> T {
        if self.lo[j].is_finite() {
            self.lo[j]
        } else if self.hi[j].is_finite() {
            self.hi[j]
        } else {
            T::zero()
        }
    }

    pub fn set_bounds(&mut self, j: usize, lo: T, hi: T) {
        self.lo[j] = lo;
        self.hi[j] = hi;
    }

    pub fn bounds(&self, j: usize) -> (T, T) {
        (self.lo[j], self.hi[j])
    }

    pub fn values(&self) -> &[T] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> T {
        self.x.iter().zip(&self.cost).map(|(&x, &c)| x * c).sum()
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> T {
        self.t[r * self.n + c]
    }

    #[inline]
    fn reduced_cost(&self, c: usize) -> T {
        self.t[self.m * self.n + c]
    }

    pub fn certificate(&self) -> LpCertificate<T> {
        let mut reduced_costs = vec![T::zero(); self.n];
        let mut status = vec![BasisStatus::Basic; self.n];
        for j in 0..self.n {
            if let Pos::Col(c) = self.pos[j] {
                reduced_costs[j] = self.reduced_cost(c);
                status[j] = self.nonbasic_status(j);
            }
        }
        LpCertificate { reduced_costs, status }
    }

    fn nonbasic_status(&self, j: usize) -> BasisStatus {
        let (lo, hi, x) = (self.lo[j], self.hi[j], self.x[j]);
        if lo == hi {
            BasisStatus::Fixed
        } else if x == lo {
            BasisStatus::AtLower
        } else if x == hi {
            BasisStatus::AtUpper
        } else {
            BasisStatus::Free
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let (n, m) = (self.n, self.m);
        let p = self.t[r * n + c];
        let inv = T::one() / p;
        let drop = T::epsilon() * T::lit(64.0);
        self.row_buf.clear();
        self.row_buf.extend_from_slice(&self.t[r * n..(r + 1) * n]);
        self.scratch.clear();
        for (j, v) in self.row_buf.iter_mut().enumerate() {
            *v = if j == c { inv } else { -*v * inv };
            if *v != T::zero() {
                self.scratch.push((j, *v));
            }
        }
        self.t[r * n..(r + 1) * n].copy_from_slice(&self.row_buf);
        // Dense pivot rows use a contiguous update the compiler vectorizes.
        let dense = self.scratch.len() * 4 > n;
        for i in 0..=m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + c];
            if f == T::zero() {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            row[c] = T::zero();
            if dense {
                for (x, &v) in row.iter_mut().zip(&self.row_buf) {
                    *x += f * v;
                }
            } else {
                for &(j, v) in &self.scratch {
                    let nv = row[j] + f * v;
                    row[j] = if nv.abs() < drop { T::zero() } else { nv };
                }
            }
        }
        let entering = self.col_var[c];
        let leaving = self.row_var[r];
        self.row_var[r] = entering;
        self.col_var[c] = leaving;
        self.pos[entering] = Pos::Row(r);
        self.pos[leaving] = Pos::Col(c);
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Moves nonbasic column `c` by `delta`, updating the basic variables.
    fn shift_nonbasic(&mut self, c: usize, delta: T) {
        let n = self.n;
        for r in 0..self.m {
            let a = self.t[r * n + c];
            if a != T::zero() {
                let j = self.row_var[r];
                self.x[j] += a * delta;
            }
        }
        let j = self.col_var[c];
        self.x[j] += delta;
    }

    /// Full recomputation every few pivots, incremental updates otherwise.
    fn refresh_basics(&mut self) {
        if self.iterations.is_multiple_of(32) {
            self.compute_basics();
        } else {
            self.stale = true;
        }
    }

    fn compute_basics(&mut self) {
        self.stale = false;
        let n = self.n;
        self.scratch.clear();
        for c in 0..n {
            let v = self.x[self.col_var[c]];
            if v != T::zero() {
                self.scratch.push((c, v));
            }
        }
        for r in 0..self.m {
            let row = &self.t[r * n..(r + 1) * n];
            let s: T = self.scratch.iter().map(|&(c, v)| row[c] * v).sum();
            self.x[self.row_var[r]] = s;
        }
    }

    /// Places each nonbasic variable at the bound its reduced cost prefers.
    /// Returns whether the resulting basis is dual feasible.
    fn place_nonbasics(&mut self) -> bool {
        let mut dual_feasible = true;
        for c in 0..self.n {
            let j = self.col_var[c];
            let d = self.reduced_cost(c);
            let (lo, hi) = (self.lo[j], self.hi[j]);
            let cur = self.x[j];
            let v = if lo == hi {
                lo
            } else if d > self.dual_tol {
                if lo.is_finite() {
                    lo
                } else {
                    dual_feasible = false;
                    self.default_position(j)
                }
            } else if d < -self.dual_tol {
                if hi.is_finite() {
                    hi
                } else {
                    dual_feasible = false;
                    self.default_position(j)
                }
            } else if (cur == lo || cur == hi) && cur.is_finite() {
                cur
            } else {
                self.default_position(j)
            };
            self.x[j] = v;
        }
        dual_feasible
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.n).all(|c| self.dual_infeasibility(c) <= self.dual_tol)
    }

    fn dual_infeasibility(&self, c: usize) -> T {
        let j = self.col_var[c];
        let d = self.reduced_cost(c);
        let (lo, hi, x) = (self.lo[j], self.hi[j], self.x[j]);
        if lo == hi {
            T::zero()
        } else if x == lo {
            (-d).max(T::zero())
        } else if x == hi {
            d.max(T::zero())
        } else {
            d.abs()
        }
    }

    fn primal_infeasibility(&self, j: usize) -> T {
        let x = self.x[j];
        (self.lo[j] - x).max(x - self.hi[j]).max(T::zero())
    }

    #[inline]
    fn ftol(&self, bound: T) -> T {
        self.tol * T::one().max(bound.abs())
    }

    #[inline]
    fn below(&self, j: usize) -> bool {
        self.x[j] < self.lo[j] - self.ftol(self.lo[j])
    }

    #[inline]
    fn above(&self, j: usize) -> bool {
        self.x[j] > self.hi[j] + self.ftol(self.hi[j])
    }

    /// Rebuilds the tableau from the original rows for the current basis.
    pub fn refactor(&mut self) {
        let mut target = vec![false; self.n + self.m];
        for &v in &self.row_var {
            target[v] = true;
        }
        self.reset_to_slack_basis();
        for j in 0..self.n {
            if !target[j] {
                continue;
            }
            let Pos::Col(c) = self.pos[j] else { continue };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.m {
                let v = self.row_var[r];
                if v < self.n || target[v] {
                    continue;
                }
                let a = self.at(r, c).abs();
                if a > self.piv_tol && best.is_none_or(|(_, b)| a > b) {
                    best = Some((r, a));
                }
            }
            if let Some((r, _)) = best {
                self.pivot(r, c);
            }
        }
        self.iterations -= self.since_refactor as u64;
        self.since_refactor = 0;
        for c in 0..self.n {
            let j = self.col_var[c];
            let x = self.x[j];
            if !(x == self.lo[j] || x == self.hi[j]) {
                self.x[j] = self.default_position(j);
            }
        }
    }

    /// Solves the LP for the current bounds starting from the current basis.
    pub fn reoptimize(&mut self, cutoff: Option<T>) -> Result<LpStatus, MilpError> {
        if self.trivially_infeasible || (0..self.n + self.m).any(|j| self.lo[j] > self.hi[j]) {
            return Ok(LpStatus::Infeasible);
        }
        let mut last_err = None;
        for attempt in 0..3 {
            if attempt > 0 || self.since_refactor > REFACTOR_EVERY {
                self.refactor();
            }
            match self.solve_once(cutoff) {
                Ok(Some(status)) => return Ok(status),
                Ok(None) => {}
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| {
            MilpError::NumericalInstability("basis residual stayed above tolerance after refactorization".into())
        }))
    }

    /// One solve from the current basis; `None` when the final residual
    /// check fails.
    fn solve_once(&mut self, cutoff: Option<T>) -> Result<Option<LpStatus>, MilpError> {
        let dual_ok = self.place_nonbasics();
        self.compute_basics();
        let mut status = if dual_ok { self.dual_simplex(cutoff)? } else { self.primal_simplex()? };
        if status == LpStatus::Optimal && !self.is_dual_feasible() {
            status = self.primal_simplex()?;
        }
        if status != LpStatus::Optimal || self.residual_ok() {
            Ok(Some(status))
        } else {
            Ok(None)
        }
    }

    fn residual_ok(&mut self) -> bool {
        let limit = T::lit(1e-7);
        for (i, row) in self.rows.iter().enumerate() {
            let act: T = row.iter().map(|&(j, a)| a * self.x[j]).sum();
            let scale = T::one().max(act.abs());
            if (act - self.x[self.n + i]).abs() > limit * scale {
                return false;
            }
            let s = self.n + i;
            let viol = (self.lo[s] - act).max(act - self.hi[s]);
            if viol > T::lit(1e-6) * scale {
                return false;
            }
        }
        true
    }

    fn iteration_cap(&self) -> u64 {
        self.iterations + 50 * (self.n + self.m) as u64 + 1000
    }

    fn primal_simplex(&mut self) -> Result<LpStatus, MilpError> {
        let cap = self.iteration_cap();
        let mut bland = false;
        let mut best = T::infinity();
        let mut stall = 0usize;
        let mut phase_one_cost = vec![T::zero(); self.n];
        loop {
            if self.iterations > cap {
                return Err(MilpError::NumericalInstability("primal simplex iteration cap".into()));
            }
            // Phase-one weights: -1 below lower bound, +1 above upper bound.
            let mut infeasible_sum = T::zero();
            let mut any_infeasible = false;
            phase_one_cost.iter_mut().for_each(|v| *v = T::zero());
            for r in 0..self.m {
                let j = self.row_var[r];
                let w = if self.below(j) {
                    -T::one()
                } else if self.above(j) {
                    T::one()
                } else {
                    continue;
                };
                any_infeasible = true;
                infeasible_sum += self.primal_infeasibility(j);
                let row = &self.t[r * self.n..(r + 1) * self.n];
                for (acc, &a) in phase_one_cost.iter_mut().zip(row) {
                    *acc += w * a;
                }
            }
            let progress = if any_infeasible { infeasible_sum } else { self.objective() };
            if progress < best - self.tol * T::one().max(best.abs()) {
                best = progress;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            let dtol = if any_infeasible { self.piv_tol } else { self.dual_tol };
            let mut enter: Option<(usize, T, T)> = None; // (col, dir, score)
            for c in 0..self.n {
                let j = self.col_var[c];
                let (lo, hi, x) = (self.lo[j], self.hi[j], self.x[j]);
                if lo == hi {
                    continue;
                }
                let d = if any_infeasible { phase_one_cost[c] } else { self.reduced_cost(c) };
                let dir = if d < -dtol && x < hi {
                    T::one()
                } else if d > dtol && x > lo {
                    -T::one()
                } else {
                    continue;
                };
                let score = d.abs();
                let better = match enter {
                    None => true,
                    Some((bc, _, s)) => {
                        if bland {
                            j < self.col_var[bc]
                        } else {
                            score > s
                        }
                    }
                };
                if better {
                    enter = Some((c, dir, score));
                }
            }
            let Some((c, dir, _)) = enter else {
                if self.stale {
                    self.compute_basics();
                    continue;
                }
                return Ok(if any_infeasible { LpStatus::Infeasible } else { LpStatus::Optimal });
            };
            let j_in = self.col_var[c];

            // Ratio test: Harris two-pass normally, textbook with
            // smallest-index ties once stalled.
            let limit = self.hi[j_in] - self.lo[j_in];
            let mut relaxed = T::infinity();
            for r in 0..self.m {
                let alpha = self.at(r, c) * dir;
                if alpha.abs() <= self.piv_tol {
                    continue;
                }
                if let Some(bound) = self.row_breakpoint(r, alpha, any_infeasible) {
                    let j = self.row_var[r];
                    let room = if bland {
                        (bound - self.x[j]) / alpha
                    } else if alpha > T::zero() {
                        (bound + self.ftol(bound) - self.x[j]) / alpha
                    } else {
                        (bound - self.ftol(bound) - self.x[j]) / alpha
                    };
                    relaxed = relaxed.min(room.max(T::zero()));
                }
            }
            let mut leave: Option<(usize, T, T)> = None; // (row, bound, step)
            for r in 0..self.m {
                let alpha = self.at(r, c) * dir;
                if alpha.abs() <= self.piv_tol {
                    continue;
                }
                if let Some(bound) = self.row_breakpoint(r, alpha, any_infeasible) {
                    let j = self.row_var[r];
                    let step = ((bound - self.x[j]) / alpha).max(T::zero());
                    if step > relaxed {
                        continue;
                    }
                    let take = match leave {
                        None => true,
                        Some((br, _, _)) => {
                            if bland {
                                j < self.row_var[br]
                            } else {
                                alpha.abs() > self.at(br, c).abs()
                            }
                        }
                    };
                    if take {
                        leave = Some((r, bound, step));
                    }
                }
            }
            match leave {
                Some((r, bound, step)) if step < limit => {
                    let j_out = self.row_var[r];
                    self.shift_nonbasic(c, dir * step);
                    self.pivot(r, c);
                    self.x[j_out] = bound;
                    self.refresh_basics();
                }
                _ => {
                    if !limit.is_finite() {
                        if any_infeasible {
                            return Err(MilpError::NumericalInstability("unbounded phase-one ray".into()));
                        }
                        return Ok(LpStatus::Unbounded);
                    }
                    // Bound flip of the entering variable.
                    let to = if dir > T::zero() { self.hi[j_in] } else { self.lo[j_in] };
                    self.shift_nonbasic(c, to - self.x[j_in]);
                    self.x[j_in] = to;
                    self.iterations += 1;
                    self.refresh_basics();
                }
            }
        }
    }

    /// Bound the basic variable in row `r` runs into when it moves at rate
    /// `alpha` per unit step, if any.
    fn row_breakpoint(&self, r: usize, alpha: T, phase_one: bool) -> Option<T> {
        let j = self.row_var[r];
        let (lo, hi) = (self.lo[j], self.hi[j]);
        if phase_one && self.below(j) {
            return (alpha > T::zero()).then_some(lo);
        }
        if phase_one && self.above(j) {
            return (alpha < T::zero()).then_some(hi);
        }
        if alpha > T::zero() {
            hi.is_finite().then_some(hi)
        } else {
            lo.is_finite().then_some(lo)
        }
    }

    fn dual_simplex(&mut self, cutoff: Option<T>) -> Result<LpStatus, MilpError> {
        let cap = self.iteration_cap();
        let mut bland = false;
        let mut best = T::neg_infinity();
        let mut stall = 0usize;
        loop {
            if self.iterations > cap {
                return Err(MilpError::NumericalInstability("dual simplex iteration cap".into()));
            }
            let obj = self.objective();
            if let Some(cut) = cutoff {
                if obj > cut {
                    if self.stale {
                        self.compute_basics();
                        continue;
                    }
                    return Ok(LpStatus::Cutoff);
                }
            }
            if obj > best + self.tol * T::one().max(best.abs()) {
                best = obj;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.m {
                let j = self.row_var[r];
                if !(self.below(j) || self.above(j)) {
                    continue;
                }
                let inf = self.primal_infeasibility(j);
                let take = match leave {
                    None => true,
                    Some((br, bi)) => {
                        if bland {
                            j < self.row_var[br]
                        } else {
                            inf > bi
                        }
                    }
                };
                if take {
                    leave = Some((r, inf));
                }
            }
            let Some((r, _)) = leave else {
                if self.stale {
                    self.compute_basics();
                    continue;
                }
                return Ok(LpStatus::Optimal);
            };
            let j_out = self.row_var[r];
            let increase = self.x[j_out] < self.lo[j_out];
            let target = if increase { self.lo[j_out] } else { self.hi[j_out] };

            // Dual ratio test: entering j must move x_out toward `target`.
            let eligible = |tab: &Self, c: usize| -> Option<T> {
                let j = tab.col_var[c];
                let (lo, hi, x) = (tab.lo[j], tab.hi[j], tab.x[j]);
                if lo == hi {
                    return None;
                }
                let alpha = tab.at(r, c);
                if alpha.abs() <= tab.piv_tol {
                    return None;
                }
                let can_up = x < hi;
                let can_down = x > lo;
                let ok = if increase {
                    (alpha > T::zero() && can_up) || (alpha < T::zero() && can_down)
                } else {
                    (alpha < T::zero() && can_up) || (alpha > T::zero() && can_down)
                };
                ok.then_some(alpha)
            };
            let slack = if bland { T::zero() } else { self.dual_tol };
            let mut relaxed = T::infinity();
            for c in 0..self.n {
                if let Some(alpha) = eligible(self, c) {
                    let d = self.reduced_cost(c);
                    relaxed = relaxed.min((d.abs() + slack) / alpha.abs());
                }
            }
            let mut enter: Option<(usize, T)> = None;
            for c in 0..self.n {
                if let Some(alpha) = eligible(self, c) {
                    let ratio = self.reduced_cost(c).abs() / alpha.abs();
                    if ratio > relaxed {
                        continue;
                    }
                    let take = match enter {
                        None => true,
                        Some((bc, ba)) => {
                            if bland {
                                self.col_var[c] < self.col_var[bc]
                            } else {
                                alpha.abs() > ba.abs()
                            }
                        }
                    };
                    if take {
                        enter = Some((c, alpha));
                    }
                }
            }
            let Some((c, alpha)) = enter else {
                if self.stale {
                    self.compute_basics();
                    continue;
                }
                return Ok(LpStatus::Infeasible);
            };
            self.shift_nonbasic(c, (target - self.x[j_out]) / alpha);
            self.pivot(r, c);
            self.x[j_out] = target;
            self.refresh_basics();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(build: impl FnOnce(&mut MilpProblem<f64>)) -> (LpStatus, Tableau<f64>) {
        let mut p = MilpProblem::new("t");
        build(&mut p);
        let mut tab = Tableau::new(&p).unwrap();
        let st = tab.reoptimize(None).unwrap();
        (st, tab)
    }

    #[test]
    fn single_bound_maximization() {
        let (st, tab) = lp(|p| {
            let x = p.add_continuous("x", 0.0, f64::INFINITY);
            p.add_constraint("ub", vec![(x, 1.0)], Relation::LessEq, 5.0);
            p.add_objective_term(x, -1.0);
        });
        assert_eq!(st, LpStatus::Optimal);
        assert!((tab.objective() + 5.0).abs() < 1e-12);
        assert!((tab.values()[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn free_variable_and_equality() {
        let (st, tab) = lp(|p| {
            let x = p.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
            let y = p.add_continuous("y", 0.0, 4.0);
            p.add_constraint("e", vec![(x, 1.0), (y, 1.0)], Relation::Equal, 1.0);
            p.add_objective_term(y, -1.0);
        });
        assert_eq!(st, LpStatus::Optimal);
        assert!((tab.values()[0] + 3.0).abs() < 1e-12);
        assert!((tab.values()[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray_detected() {
        let (st, _) = lp(|p| {
            let x = p.add_continuous("x", 0.0, f64::INFINITY);
            let y = p.add_continuous("y", 0.0, f64::INFINITY);
            p.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Relation::LessEq, 1.0);
            p.add_objective_term(x, -1.0);
        });
        assert_eq!(st, LpStatus::Unbounded);
    }

    #[test]
    fn empty_row_with_bad_rhs_is_infeasible() {
        let (st, _) = lp(|p| {
            p.add_continuous("x", 0.0, 1.0);
            p.add_constraint("empty", vec![], Relation::GreaterEq, 1.0);
        });
        assert_eq!(st, LpStatus::Infeasible);
    }

    #[test]
    fn refactor_preserves_solution() {
        let (_, mut tab) = lp(|p| {
            let x = p.add_continuous("x", 0.0, 10.0);
            let y = p.add_continuous("y", 0.0, 10.0);
            p.add_constraint("a", vec![(x, 1.0), (y, 2.0)], Relation::GreaterEq, 4.0);
            p.add_constraint("b", vec![(x, 3.0), (y, 1.0)], Relation::GreaterEq, 6.0);
            p.add_objective_term(x, 1.0);
            p.add_objective_term(y, 1.0);
        });
        let before = tab.values().to_vec();
        tab.refactor();
        tab.compute_basics();
        for (a, b) in before.iter().zip(tab.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((tab.objective() - 2.8).abs() < 1e-12);
    }

    #[test]
    fn dual_reoptimization_after_bound_change() {
        let mut p = MilpProblem::<f64>::new("t");
        let x = p.add_continuous("x", 0.0, 10.0);
        let y = p.add_continuous("y", 0.0, 10.0);
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::GreaterEq, 3.0);
        p.add_objective_term(x, 1.0);
        p.add_objective_term(y, 2.0);
        let mut tab = Tableau::new(&p).unwrap();
        assert_eq!(tab.reoptimize(None).unwrap(), LpStatus::Optimal);
        assert!((tab.objective() - 3.0).abs() < 1e-12);
        tab.set_bounds(x, 0.0, 1.0);
        assert_eq!(tab.reoptimize(None).unwrap(), LpStatus::Optimal);
        assert!((tab.objective() - 5.0).abs() < 1e-12);
        tab.set_bounds(x, 0.0, 0.5);
        assert_eq!(tab.reoptimize(Some(5.2)).unwrap(), LpStatus::Cutoff);
        assert_eq!(tab.reoptimize(Some(6.0)).unwrap(), LpStatus::Optimal);
        assert!((tab.objective() - 5.5).abs() < 1e-12);
    }
}
