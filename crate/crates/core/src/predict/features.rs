use serde::{Deserialize, Serialize};

use super::PredictError;
use crate::grid::{LoadProfile, PowerSystem};
use crate::Scalar;

/// Flattened model input for one profile: nodal demand `[bus][period]`, or in
/// stochastic mode the net loads of every scenario, scenario-major.
pub fn raw_features(system: &PowerSystem, profile: &LoadProfile, stochastic: bool) -> Vec<f64> {
    if !stochastic {
        return profile.demand.iter().flatten().copied().collect();
    }
    let mut out = Vec::with_capacity(system.num_scenarios() * system.num_buses() * system.horizon);
    for s in 0..system.num_scenarios() {
        for n in 0..system.num_buses() {
            for t in 0..system.horizon {
                out.push(profile.net_load(system, n, t, s));
            }
        }
    }
    out
}

/// Min-max scaling fitted on training inputs. Features that are constant on
/// the training set carry no information and are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeatureSpec<T: Scalar> {
    /// Length of the raw input vector.
    pub input_len: usize,
    /// Raw positions that are kept, ascending.
    pub kept: Vec<usize>,
    pub min: Vec<T>,
    pub max: Vec<T>,
    pub dropped: Vec<usize>,
}

impl<T: Scalar> FeatureSpec<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self, PredictError> {
        let first = rows.first().ok_or(PredictError::TooFewSamples(0))?;
        let input_len = first.len();
        let mut lo = first.clone();
        let mut hi = first.clone();
        for row in rows {
            if row.len() != input_len {
                return Err(PredictError::Dimension { expected: input_len, found: row.len() });
            }
            for ((l, h), &x) in lo.iter_mut().zip(hi.iter_mut()).zip(row) {
                *l = l.min(x);
                *h = h.max(x);
            }
        }
        let (mut kept, mut min, mut max, mut dropped) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for j in 0..input_len {
            if hi[j] > lo[j] {
                kept.push(j);
                min.push(lo[j]);
                max.push(hi[j]);
            } else {
                dropped.push(j);
            }
        }
        Ok(Self { input_len, kept, min, max, dropped })
    }

    /// Number of model features after dropping.
    pub fn dim(&self) -> usize {
        self.kept.len()
    }

    pub fn transform(&self, raw: &[T]) -> Result<Vec<T>, PredictError> {
        if raw.len() != self.input_len {
            return Err(PredictError::Dimension { expected: self.input_len, found: raw.len() });
        }
        Ok(self.kept.iter().zip(self.min.iter().zip(&self.max)).map(|(&j, (&lo, &hi))| (raw[j] - lo) / (hi - lo)).collect())
    }
}
