use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{log_loss, sigmoid, FeatureSpec, Learner};
use crate::Scalar;

/// One tanh hidden layer followed by a sigmoid output per target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MlpModel<T: Scalar> {
    /// `[hidden][feature]`
    pub w1: Vec<Vec<T>>,
    pub b1: Vec<T>,
    /// `[target][hidden]`
    pub w2: Vec<Vec<T>>,
    pub b2: Vec<T>,
    pub features: FeatureSpec<T>,
    pub learning_rate: T,
    pub loss_curve: Vec<T>,
}

fn xavier<T: Scalar>(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Vec<Vec<T>> {
    let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
    (0..fan_out).map(|_| (0..fan_in).map(|_| T::lit(rng.gen_range(-limit..=limit))).collect()).collect()
}

impl<T: Scalar> MlpModel<T> {
    /// Seeded Xavier-uniform weights, zero biases.
    pub fn init(features: FeatureSpec<T>, hidden: usize, targets: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = features.dim();
        let w1 = xavier(&mut rng, d, hidden);
        let w2 = xavier(&mut rng, hidden, targets);
        Self {
            w1,
            b1: vec![T::zero(); hidden],
            w2,
            b2: vec![T::zero(); targets],
            features,
            learning_rate: T::zero(),
            loss_curve: Vec::new(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    fn layers(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let a: Vec<T> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, &b)| (b + w.iter().zip(x).map(|(&p, &q)| p * q).sum::<T>()).tanh())
            .collect();
        let z = self.w2.iter().zip(&self.b2).map(|(w, &b)| b + w.iter().zip(&a).map(|(&p, &q)| p * q).sum::<T>()).collect();
        (a, z)
    }
}

impl<T: Scalar> Learner<T> for MlpModel<T> {
    fn targets(&self) -> usize {
        self.b2.len()
    }

    fn feature_spec(&self) -> &FeatureSpec<T> {
        &self.features
    }

    fn forward(&self, x: &[T]) -> Vec<T> {
        self.layers(x).1.into_iter().map(sigmoid).collect()
    }

    fn params(&self) -> Vec<T> {
        let mut out: Vec<T> = self.w1.iter().flatten().copied().collect();
        out.extend(&self.b1);
        out.extend(self.w2.iter().flatten());
        out.extend(&self.b2);
        out
    }

    fn set_params(&mut self, params: &[T]) {
        let mut it = params.iter().copied();
        for w in self.w1.iter_mut().flatten().chain(self.b1.iter_mut()) {
            *w = it.next().expect("parameter count");
        }
        for w in self.w2.iter_mut().flatten().chain(self.b2.iter_mut()) {
            *w = it.next().expect("parameter count");
        }
    }

    fn loss_and_gradient(&self, x: &[Vec<T>], y: &[Vec<T>]) -> (T, Vec<T>) {
        let (h, d, k) = (self.hidden(), self.features.dim(), self.targets());
        let m = T::from_usize(x.len()).unwrap();
        let mut loss = T::zero();
        let mut g1 = vec![T::zero(); h * d];
        let mut gb1 = vec![T::zero(); h];
        let mut g2 = vec![T::zero(); k * h];
        let mut gb2 = vec![T::zero(); k];
        let mut da = vec![T::zero(); h];
        for (xi, yi) in x.iter().zip(y) {
            let (a, z) = self.layers(xi);
            da.iter_mut().for_each(|v| *v = T::zero());
            for j in 0..k {
                loss += log_loss(z[j], yi[j]);
                let e = sigmoid(z[j]) - yi[j];
                gb2[j] += e;
                for i in 0..h {
                    g2[j * h + i] += e * a[i];
                    da[i] += e * self.w2[j][i];
                }
            }
            for i in 0..h {
                let dpre = da[i] * (T::one() - a[i] * a[i]);
                gb1[i] += dpre;
                for (g, &xv) in g1[i * d..(i + 1) * d].iter_mut().zip(xi) {
                    *g += dpre * xv;
                }
            }
        }
        let mut grad = g1;
        grad.extend(gb1);
        grad.extend(g2);
        grad.extend(gb2);
        for g in &mut grad {
            *g /= m;
        }
        (loss / m, grad)
    }

    fn loss_curve_mut(&mut self) -> &mut Vec<T> {
        &mut self.loss_curve
    }

    fn set_learning_rate(&mut self, lr: T) {
        self.learning_rate = lr;
    }
}
