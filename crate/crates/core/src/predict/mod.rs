//! Commitment predictors trained by full-batch gradient descent on the
//! summed per-target cross-entropy.

mod features;
mod metrics;
mod mlp;
mod mtlr;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{raw_features, FeatureSpec};
pub use metrics::{accuracy, confusion, Confusion};
pub use mlp::MlpModel;
pub use mtlr::MtlrModel;

use crate::datagen::Dataset;
use crate::grid::PowerSystem;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("training diverged at learning rate {lr} (iteration {iteration})")]
    Diverged { lr: f64, iteration: usize },
    #[error("every learning rate in the sweep diverged")]
    AllDiverged,
    #[error("feature dimension {found}, model expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `−y·ln σ(z) − (1−y)·ln(1−σ(z))`, evaluated without forming σ.
pub(crate) fn log_loss<T: Scalar>(z: T, y: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p() - y * z
}

/// A differentiable model over normalized features. The loss is the mean
/// over samples of the cross-entropy summed over targets.
pub trait Learner<T: Scalar> {
    fn targets(&self) -> usize;
    fn feature_spec(&self) -> &FeatureSpec<T>;
    /// Probabilities for one normalized feature vector.
    fn forward(&self, x: &[T]) -> Vec<T>;
    fn params(&self) -> Vec<T>;
    fn set_params(&mut self, params: &[T]);
    /// Loss and its gradient with respect to [`Learner::params`].
    fn loss_and_gradient(&self, x: &[Vec<T>], y: &[Vec<T>]) -> (T, Vec<T>);
    fn loss_curve_mut(&mut self) -> &mut Vec<T>;
    fn set_learning_rate(&mut self, lr: T);
}

/// Raw inputs with 0/1 targets, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Examples<T> {
    pub inputs: Vec<Vec<T>>,
    pub targets: Vec<Vec<T>>,
}

impl<T: Scalar> Examples<T> {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check(&self) -> Result<(), PredictError> {
        if self.len() < 2 {
            return Err(PredictError::TooFewSamples(self.len()));
        }
        if self.targets.len() != self.len() {
            return Err(PredictError::Dimension { expected: self.len(), found: self.targets.len() });
        }
        let k = self.targets[0].len();
        if let Some(bad) = self.targets.iter().find(|t| t.len() != k) {
            return Err(PredictError::Dimension { expected: k, found: bad.len() });
        }
        Ok(())
    }
}

/// Samples `ids` of `dataset` as examples: profile features in, flattened
/// `u[g][t]` out.
pub fn examples_from_dataset(system: &PowerSystem, dataset: &Dataset, ids: &[usize]) -> Examples<f64> {
    let stochastic = dataset.scuc.stochastic;
    let samples = ids.iter().map(|&i| &dataset.samples[i]);
    let inputs = samples.clone().map(|s| raw_features(system, &s.profile(), stochastic)).collect();
    let targets = samples.map(|s| s.schedule.flat()).collect();
    Examples { inputs, targets }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrainConfig<T: Scalar> {
    pub learning_rate: T,
    pub iterations: usize,
    /// Candidates tried by [`tune`].
    pub sweep: Vec<T>,
    /// Seeds the MLP initialization.
    pub seed: u64,
    /// MLP hidden width; `None` picks twice the target count, capped at 128.
    pub hidden: Option<usize>,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(0.003),
            iterations: 1000,
            sweep: [0.001, 0.003, 0.01, 0.03, 0.05].into_iter().map(T::lit).collect(),
            seed: 0,
            hidden: None,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<(), PredictError> {
        if self.iterations == 0 {
            return Err(PredictError::Config("iterations must be at least 1".into()));
        }
        if let Some(bad) = std::iter::once(&self.learning_rate).chain(&self.sweep).find(|lr| !(**lr > T::zero())) {
            return Err(PredictError::Config(format!("learning rate {bad} is not positive")));
        }
        if self.hidden == Some(0) {
            return Err(PredictError::Config("hidden width must be at least 1".into()));
        }
        Ok(())
    }

    pub fn hidden_width(&self, targets: usize) -> usize {
        self.hidden.unwrap_or_else(|| (2 * targets).clamp(1, 128))
    }
}

/// Runs `iterations` full-batch steps `θ ← θ − δ·Σ_i ∇ℓ_i`, recording the
/// loss before the first and after every step.
pub fn descend<T: Scalar, L: Learner<T>>(
    model: &mut L,
    x: &[Vec<T>],
    y: &[Vec<T>],
    lr: T,
    iterations: usize,
) -> Result<(), PredictError> {
    let m = T::from_usize(x.len()).unwrap();
    let step = lr * m;
    let mut params = model.params();
    let mut curve = Vec::with_capacity(iterations + 1);
    for it in 0..=iterations {
        let (loss, grad) = model.loss_and_gradient(x, y);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(PredictError::Diverged { lr: lr.as_f64(), iteration: it });
        }
        curve.push(loss);
        if it == iterations {
            break;
        }
        for (p, g) in params.iter_mut().zip(grad) {
            *p -= step * g;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(PredictError::Diverged { lr: lr.as_f64(), iteration: it + 1 });
        }
        model.set_params(&params);
    }
    *model.loss_curve_mut() = curve;
    model.set_learning_rate(lr);
    Ok(())
}

fn normalized<T: Scalar>(examples: &Examples<T>) -> Result<(FeatureSpec<T>, Vec<Vec<T>>), PredictError> {
    examples.check()?;
    let spec = FeatureSpec::fit(&examples.inputs)?;
    let x = examples.inputs.iter().map(|r| spec.transform(r)).collect::<Result<_, _>>()?;
    Ok((spec, x))
}

pub fn train_mtlr<T: Scalar>(examples: &Examples<T>, config: &TrainConfig<T>) -> Result<MtlrModel<T>, PredictError> {
    config.validate()?;
    let (spec, x) = normalized(examples)?;
    let mut model = MtlrModel::zeros(spec, examples.targets[0].len());
    descend(&mut model, &x, &examples.targets, config.learning_rate, config.iterations)?;
    Ok(model)
}

pub fn train_mlp<T: Scalar>(examples: &Examples<T>, config: &TrainConfig<T>) -> Result<MlpModel<T>, PredictError> {
    config.validate()?;
    let (spec, x) = normalized(examples)?;
    let k = examples.targets[0].len();
    let mut model = MlpModel::init(spec, config.hidden_width(k), k, config.seed);
    descend(&mut model, &x, &examples.targets, config.learning_rate, config.iterations)?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Mtlr,
    Mlp,
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mtlr" => Ok(Self::Mtlr),
            "mlp" => Ok(Self::Mlp),
            _ => Err(format!("unknown model `{s}` (expected mtlr or mlp)")),
        }
    }
}

/// A trained predictor of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "")]
pub enum Model<T: Scalar> {
    Mtlr(MtlrModel<T>),
    Mlp(MlpModel<T>),
}

impl<T: Scalar> Model<T> {
    pub fn train(kind: ModelKind, examples: &Examples<T>, config: &TrainConfig<T>) -> Result<Self, PredictError> {
        Ok(match kind {
            ModelKind::Mtlr => Self::Mtlr(train_mtlr(examples, config)?),
            ModelKind::Mlp => Self::Mlp(train_mlp(examples, config)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Mtlr(_) => ModelKind::Mtlr,
            Self::Mlp(_) => ModelKind::Mlp,
        }
    }

    fn learner(&self) -> &dyn Learner<T> {
        match self {
            Self::Mtlr(m) => m,
            Self::Mlp(m) => m,
        }
    }

    pub fn targets(&self) -> usize {
        self.learner().targets()
    }

    pub fn loss_curve(&self) -> &[T] {
        match self {
            Self::Mtlr(m) => &m.loss_curve,
            Self::Mlp(m) => &m.loss_curve,
        }
    }

    pub fn learning_rate(&self) -> T {
        match self {
            Self::Mtlr(m) => m.learning_rate,
            Self::Mlp(m) => m.learning_rate,
        }
    }

    /// Probabilities for one raw input vector.
    pub fn predict_one(&self, raw: &[T]) -> Result<Vec<T>, PredictError> {
        let l = self.learner();
        Ok(l.forward(&l.feature_spec().transform(raw)?))
    }

    /// Probabilities for every raw input, reshaped to `[sample][g][t]`.
    pub fn predict(&self, inputs: &[Vec<T>], periods: usize) -> Result<PredictionSet<T>, PredictError> {
        if periods == 0 || !self.targets().is_multiple_of(periods) {
            return Err(PredictError::Dimension { expected: self.targets(), found: periods });
        }
        let probabilities = inputs
            .iter()
            .map(|raw| Ok(self.predict_one(raw)?.chunks(periods).map(<[T]>::to_vec).collect()))
            .collect::<Result<_, PredictError>>()?;
        Ok(PredictionSet { probabilities, threshold: T::lit(0.5) })
    }
}

/// Commitment probabilities `P(u = 1)` indexed `[sample][g][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PredictionSet<T: Scalar> {
    pub probabilities: Vec<Vec<Vec<T>>>,
    pub threshold: T,
}

impl<T: Scalar> PredictionSet<T> {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Hard labels, 1 where the probability reaches the threshold.
    pub fn labels(&self) -> Vec<Vec<Vec<u8>>> {
        self.probabilities.iter().map(|s| self.sample_labels(s)).collect()
    }

    pub fn sample_labels(&self, sample: &[Vec<T>]) -> Vec<Vec<u8>> {
        sample.iter().map(|row| row.iter().map(|&p| u8::from(p >= self.threshold)).collect()).collect()
    }
}

/// Whether no loss value exceeds its predecessor beyond rounding.
pub fn is_non_increasing<T: Scalar>(curve: &[T]) -> bool {
    let slack = T::epsilon() * T::lit(64.0);
    curve.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs().max(T::one()))
}

/// Training outcome for one sweep candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepPoint<T: Scalar> {
    pub learning_rate: T,
    /// Empty if training diverged.
    pub losses: Vec<T>,
    pub train_accuracy: f64,
    pub monotone: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct Tuned<T: Scalar> {
    pub model: Model<T>,
    pub curves: Vec<SweepPoint<T>>,
}

/// Trains one model per swept learning rate and keeps the most accurate
/// among those whose loss never increased.
pub fn tune<T: Scalar>(kind: ModelKind, examples: &Examples<T>, config: &TrainConfig<T>) -> Result<Tuned<T>, PredictError> {
    if config.sweep.is_empty() {
        return Err(PredictError::Config("empty learning-rate sweep".into()));
    }
    let truth: Vec<Vec<Vec<u8>>> =
        examples.targets.iter().map(|t| vec![t.iter().map(|&y| u8::from(y > T::lit(0.5))).collect()]).collect();
    let mut curves = Vec::new();
    let mut best: Option<(f64, Model<T>)> = None;
    for &lr in &config.sweep {
        let cfg = TrainConfig { learning_rate: lr, ..config.clone() };
        match Model::train(kind, examples, &cfg) {
            Ok(model) => {
                let pred = model.predict(&examples.inputs, model.targets())?;
                let acc = accuracy(&pred.labels(), &truth);
                let monotone = is_non_increasing(model.loss_curve());
                curves.push(SweepPoint { learning_rate: lr, losses: model.loss_curve().to_vec(), train_accuracy: acc, monotone, diverged: false });
                if monotone && best.as_ref().is_none_or(|(b, _)| acc > *b) {
                    best = Some((acc, model));
                }
            }
            Err(PredictError::Diverged { .. }) => {
                curves.push(SweepPoint { learning_rate: lr, losses: Vec::new(), train_accuracy: 0.0, monotone: false, diverged: true });
            }
            Err(e) => return Err(e),
        }
    }
    let (_, model) = best.ok_or(PredictError::AllDiverged)?;
    Ok(Tuned { model, curves })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> PredictError {
    PredictError::Io { path: path.display().to_string(), msg: e.to_string() }
}

pub fn save_model<T: Scalar>(model: &Model<T>, path: impl AsRef<Path>) -> Result<(), PredictError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(model).map_err(|e| io_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<Model<T>, PredictError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// `iteration,loss` CSV; iteration 0 is the untrained model.
pub fn write_loss_curve<T: Scalar>(curve: &[T], path: impl AsRef<Path>) -> Result<(), PredictError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["iteration", "loss"]).map_err(|e| io_err(path, e))?;
    for (i, l) in curve.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()]).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
