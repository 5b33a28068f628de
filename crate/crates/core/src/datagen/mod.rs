//! Randomized load profiles and solved-sample datasets.

mod store;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use store::{load_dataset, save_dataset, SCHEMA_VERSION};

use crate::grid::{GridError, LoadProfile, PowerSystem};
use crate::milp::{solve_milp, Clock};
use crate::scuc::{build_scuc, extract_schedule, CommitmentSchedule, ScucError, ScucOptions};
use crate::Options;

#[derive(Debug, Error)]
pub enum DataGenError {
    #[error("{consecutive} consecutive draws were infeasible after {draws} draws ({feasible} feasible so far)")]
    TooManyInfeasible { consecutive: usize, draws: usize, feasible: usize },
    #[error(transparent)]
    Scuc(#[from] ScucError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("dataset schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("dataset does not match system: {0}")]
    Dimension(String),
    #[error("sample {sample}: {msg}")]
    Corrupt { sample: usize, msg: String },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("invalid generation settings: {0}")]
    Config(String),
}

/// Ranges of the system-wide (`alpha`) and per-bus-per-period (`beta`)
/// multiplicative load perturbations, both drawn uniformly from `[-x, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self { alpha: 0.10, beta: 0.04, seed: 0 }
    }
}

impl RandomConfig {
    /// The wider ranges used for out-of-sample stress tests.
    pub fn out_of_sample(seed: u64) -> Self {
        Self { alpha: 0.25, beta: 0.10, seed }
    }

    pub fn validate(&self) -> Result<(), DataGenError> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(DataGenError::Config(format!(
                "perturbation ranges must be finite and non-negative (alpha {}, beta {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    fn rng(&self, draw: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw);
        rng
    }
}

fn symmetric(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width == 0.0 {
        0.0
    } else {
        rng.gen_range(-half_width..=half_width)
    }
}

/// `d[n][t]·(1 + β[n][t])·(1 + α)`, clamped at zero. An explicit scenario
/// net-load override on `base` is dropped; renewables then come from the
/// system.
pub fn scale_profile(base: &LoadProfile, alpha: f64, beta: &[Vec<f64>]) -> LoadProfile {
    let demand = base
        .demand
        .iter()
        .zip(beta)
        .map(|(row, b)| row.iter().zip(b).map(|(&d, &b)| (d * (1.0 + b) * (1.0 + alpha)).max(0.0)).collect())
        .collect();
    LoadProfile::new(demand)
}

/// Randomized profile for draw `m`: one `α` for the whole system, one `β`
/// per bus and period, drawn in bus-major order.
pub fn perturb_profile(base: &LoadProfile, config: &RandomConfig, m: u64) -> LoadProfile {
    let mut rng = config.rng(m);
    let alpha = symmetric(&mut rng, config.alpha);
    let beta: Vec<Vec<f64>> =
        base.demand.iter().map(|row| row.iter().map(|_| symmetric(&mut rng, config.beta)).collect()).collect();
    scale_profile(base, alpha, &beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Position among the feasible samples.
    pub id: usize,
    /// Random-stream index the profile was drawn from.
    pub draw: u64,
    /// `[bus][period]` MW
    pub demand: Vec<Vec<f64>>,
    pub schedule: CommitmentSchedule,
    pub objective: f64,
    pub solve_time: f64,
    pub feasible: bool,
}

impl Sample {
    pub fn profile(&self) -> LoadProfile {
        LoadProfile::new(self.demand.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub system: String,
    pub random: RandomConfig,
    pub scuc: ScucOptions,
    pub clock: Clock,
    pub base_profile: LoadProfile,
    pub samples: Vec<Sample>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Infeasible draws skipped while collecting the samples.
    pub discarded: usize,
}

impl Dataset {
    pub fn train_samples(&self) -> Vec<&Sample> {
        self.train.iter().map(|&i| &self.samples[i]).collect()
    }

    pub fn test_samples(&self) -> Vec<&Sample> {
        self.test.iter().map(|&i| &self.samples[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub random: RandomConfig,
    pub samples: usize,
    pub train_fraction: f64,
    pub scuc: ScucOptions,
    pub solver: Options,
    pub clock: Clock,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            random: RandomConfig::default(),
            samples: 100,
            train_fraction: 0.8,
            scuc: ScucOptions::default(),
            solver: Options::default(),
            clock: Clock::Work,
            jobs: 0,
        }
    }
}

/// Result of one draw: the perturbed profile and, when feasible, the solved
/// schedule with its objective and effort.
pub(crate) struct Draw {
    pub draw: u64,
    pub demand: Vec<Vec<f64>>,
    pub solved: Option<(CommitmentSchedule, f64, f64)>,
}

pub(crate) fn solve_draw(
    system: &PowerSystem,
    base: &LoadProfile,
    config: &GenerateConfig,
    m: u64,
) -> Result<Draw, DataGenError> {
    let profile = perturb_profile(base, &config.random, m);
    let (problem, index) = build_scuc(system, &profile, &config.scuc)?;
    let solution = solve_milp(&problem, &config.solver).map_err(ScucError::from)?;
    let solved = if solution.status.has_solution() {
        let ex = extract_schedule(&solution, &index)?;
        Some((ex.schedule, ex.objective, config.clock.measure(&solution)))
    } else {
        None
    };
    Ok(Draw { draw: m, demand: profile.demand, solved })
}

pub(crate) fn with_pool<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R, DataGenError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| DataGenError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Draws profiles `m = 0, 1, ...` in order, keeping the first `count` whose
/// full SCUC is feasible. Draws are solved in parallel batches but consumed
/// in draw order, so the result does not depend on the thread count.
pub(crate) fn collect_feasible(
    system: &PowerSystem,
    base: &LoadProfile,
    config: &GenerateConfig,
    count: usize,
) -> Result<(Vec<Draw>, usize), DataGenError> {
    config.random.validate()?;
    base.validate_for(system)?;
    let batch = (rayon::current_num_threads() * 2).max(1) as u64;
    let limit = 10 * count.max(1);
    let mut kept = Vec::with_capacity(count);
    let (mut next, mut discarded, mut consecutive) = (0u64, 0usize, 0usize);
    while kept.len() < count {
        let draws: Vec<Result<Draw, DataGenError>> =
            (next..next + batch).into_par_iter().map(|m| solve_draw(system, base, config, m)).collect();
        next += batch;
        for d in draws {
            let d = d?;
            if kept.len() == count {
                break;
            }
            if d.solved.is_some() {
                consecutive = 0;
                kept.push(d);
            } else {
                discarded += 1;
                consecutive += 1;
                if consecutive > limit {
                    return Err(DataGenError::TooManyInfeasible {
                        consecutive,
                        draws: d.draw as usize + 1,
                        feasible: kept.len(),
                    });
                }
            }
        }
    }
    Ok((kept, discarded))
}

/// Seeded shuffle of `0..n` split into sorted train and test id lists.
pub fn split_ids(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    ids.shuffle(&mut rng);
    let n_train = ((n as f64) * train_fraction).round() as usize;
    let mut train = ids[..n_train.min(n)].to_vec();
    let mut test = ids[n_train.min(n)..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Solves the full SCUC on randomized copies of `base` until
/// `config.samples` feasible samples exist, then splits them.
pub fn generate_dataset(
    system: &PowerSystem,
    base: &LoadProfile,
    config: &GenerateConfig,
) -> Result<Dataset, DataGenError> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(DataGenError::Config(format!("train fraction {} outside (0, 1)", config.train_fraction)));
    }
    let (draws, discarded) = with_pool(config.jobs, || collect_feasible(system, base, config, config.samples))??;
    let samples = draws
        .into_iter()
        .enumerate()
        .map(|(id, d)| {
            let (schedule, objective, solve_time) = d.solved.expect("kept draws are feasible");
            Sample { id, draw: d.draw, demand: d.demand, schedule, objective, solve_time, feasible: true }
        })
        .collect::<Vec<_>>();
    let (train, test) = split_ids(samples.len(), config.train_fraction, config.random.seed);
    Ok(Dataset {
        system: system.name.clone(),
        random: config.random,
        scuc: config.scuc.clone(),
        clock: config.clock,
        base_profile: base.clone(),
        samples,
        train,
        test,
        discarded,
    })
}
