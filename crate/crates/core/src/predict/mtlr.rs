use serde::{Deserialize, Serialize};

use super::{log_loss, sigmoid, FeatureSpec, Learner};
use crate::Scalar;

/// Multi-target logistic regression: one weight matrix maps the feature
/// vector to every target's logit, plus a bias per target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MtlrModel<T: Scalar> {
    /// `[target][feature]`
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
    pub features: FeatureSpec<T>,
    pub learning_rate: T,
    pub loss_curve: Vec<T>,
}

impl<T: Scalar> MtlrModel<T> {
    /// Zero weights and biases, so every probability starts at one half.
    pub fn zeros(features: FeatureSpec<T>, targets: usize) -> Self {
        let d = features.dim();
        Self {
            weights: vec![vec![T::zero(); d]; targets],
            bias: vec![T::zero(); targets],
            features,
            learning_rate: T::zero(),
            loss_curve: Vec::new(),
        }
    }

    fn logits(&self, x: &[T]) -> Vec<T> {
        self.weights.iter().zip(&self.bias).map(|(w, &b)| b + w.iter().zip(x).map(|(&a, &c)| a * c).sum::<T>()).collect()
    }
}

impl<T: Scalar> Learner<T> for MtlrModel<T> {
    fn targets(&self) -> usize {
        self.bias.len()
    }

    fn feature_spec(&self) -> &FeatureSpec<T> {
        &self.features
    }

    fn forward(&self, x: &[T]) -> Vec<T> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }

    fn params(&self) -> Vec<T> {
        let mut out: Vec<T> = self.weights.iter().flatten().copied().collect();
        out.extend(&self.bias);
        out
    }

    fn set_params(&mut self, params: &[T]) {
        let d = self.features.dim();
        let mut it = params.iter().copied();
        for row in &mut self.weights {
            for (w, p) in row.iter_mut().zip(it.by_ref().take(d)) {
                *w = p;
            }
        }
        for (b, p) in self.bias.iter_mut().zip(it) {
            *b = p;
        }
    }

    fn loss_and_gradient(&self, x: &[Vec<T>], y: &[Vec<T>]) -> (T, Vec<T>) {
        let (k, d) = (self.targets(), self.features.dim());
        let m = T::from_usize(x.len()).unwrap();
        let mut loss = T::zero();
        let mut gw = vec![T::zero(); k * d];
        let mut gb = vec![T::zero(); k];
        for (xi, yi) in x.iter().zip(y) {
            for (j, (z, &yj)) in self.logits(xi).into_iter().zip(yi).enumerate() {
                loss += log_loss(z, yj);
                let e = sigmoid(z) - yj;
                gb[j] += e;
                for (g, &xv) in gw[j * d..(j + 1) * d].iter_mut().zip(xi) {
                    *g += e * xv;
                }
            }
        }
        gw.extend(gb);
        for g in &mut gw {
            *g /= m;
        }
        (loss / m, gw)
    }

    fn loss_curve_mut(&mut self) -> &mut Vec<T> {
        &mut self.loss_curve
    }

    fn set_learning_rate(&mut self, lr: T) {
        self.learning_rate = lr;
    }
}
