use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MilpError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    LessEq,
    Equal,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Variable<T: Scalar> {
    pub name: String,
    pub lower: T,
    pub upper: T,
    pub kind: VarKind,
}

/// One linear row `Σ coef·x  (≤ | = | ≥)  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Constraint<T: Scalar> {
    pub name: String,
    pub terms: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn activity(&self, values: &[T]) -> T {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate the row (zero when satisfied).
    pub fn violation(&self, values: &[T]) -> T {
        let lhs = self.activity(values);
        match self.relation {
            Relation::LessEq => (lhs - self.rhs).max(T::zero()),
            Relation::GreaterEq => (self.rhs - lhs).max(T::zero()),
            Relation::Equal => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization MILP over continuous and binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MilpProblem<T: Scalar> {
    pub name: String,
    pub variables: Vec<Variable<T>>,
    pub constraints: Vec<Constraint<T>>,
    pub objective: Vec<(usize, T)>,
    pub objective_constant: T,
}

impl<T: Scalar> Default for MilpProblem<T> {
    fn default() -> Self {
        Self::new("problem")
    }
}

impl<T: Scalar> MilpProblem<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: T::zero(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: T, upper: T, kind: VarKind) -> usize {
        self.variables.push(Variable { name: name.into(), lower, upper, kind });
        self.variables.len() - 1
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: T, upper: T) -> usize {
        self.add_variable(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.add_variable(name, T::zero(), T::one(), VarKind::Binary)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, T)>,
        relation: Relation,
        rhs: T,
    ) -> usize {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
        self.constraints.len() - 1
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: usize, coef: T) {
        self.objective.push((var, coef));
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Binaries whose bounds still admit both 0 and 1.
    pub fn num_free_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary && v.lower < v.upper)
            .count()
    }

    /// Dense objective vector with duplicate terms merged.
    pub fn objective_dense(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.variables.len()];
        for &(j, a) in &self.objective {
            c[j] += a;
        }
        c
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.objective_constant + self.objective.iter().map(|&(j, a)| a * values[j]).sum::<T>()
    }

    /// Largest row violation and bound violation of `values`.
    pub fn max_violation(&self, values: &[T]) -> T {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(T::zero(), T::max);
        self.variables.iter().zip(values).fold(rows, |acc, (v, &x)| {
            acc.max(v.lower - x).max(x - v.upper)
        })
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.variables.len();
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(MilpError::InvalidBounds { var: v.name.clone(), index: j });
            }
            if v.kind == VarKind::Binary && (v.lower < T::zero() || v.upper > T::one()) {
                return Err(MilpError::InvalidBounds { var: v.name.clone(), index: j });
            }
        }
        for c in &self.constraints {
            if c.rhs.is_nan() || c.rhs.is_infinite() {
                return Err(MilpError::InvalidRow { row: c.name.clone() });
            }
            for &(j, a) in &c.terms {
                if j >= n {
                    return Err(MilpError::UnknownVariable { row: c.name.clone(), index: j });
                }
                if !a.is_finite() {
                    return Err(MilpError::InvalidRow { row: c.name.clone() });
                }
            }
        }
        for &(j, a) in &self.objective {
            if j >= n {
                return Err(MilpError::UnknownVariable { row: "objective".into(), index: j });
            }
            if !a.is_finite() {
                return Err(MilpError::InvalidRow { row: "objective".into() });
            }
        }
        Ok(())
    }

    /// Copy of the problem with every variable treated as continuous.
    pub fn relaxed(&self) -> Self {
        let mut p = self.clone();
        for v in &mut p.variables {
            v.kind = VarKind::Continuous;
        }
        p
    }
}

/// Returns a problem whose fixed variables have equal lower and upper
/// bounds. All other data is copied unchanged.
pub fn fix_variables<T: Scalar>(
    problem: &MilpProblem<T>,
    fixings: &BTreeMap<usize, T>,
) -> Result<MilpProblem<T>, MilpError> {
    let mut out = problem.clone();
    for (&j, &value) in fixings {
        let var = out
            .variables
            .get_mut(j)
            .ok_or_else(|| MilpError::UnknownVariable { row: "fixing".into(), index: j })?;
        let integral = var.kind != VarKind::Binary || value == T::zero() || value == T::one();
        if value < var.lower || value > var.upper || !integral {
            return Err(MilpError::FixingOutOfBounds {
                var: var.name.clone(),
                value: value.as_f64(),
                lower: var.lower.as_f64(),
                upper: var.upper.as_f64(),
            });
        }
        var.lower = value;
        var.upper = value;
    }
    Ok(out)
}
