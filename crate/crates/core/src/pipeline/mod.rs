//! Prediction-driven model reduction and its evaluation against the full
//! SCUC.

mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{write_reports, ExperimentReport, SampleRecord, Summary};

use crate::datagen::{collect_feasible, with_pool, DataGenError, Dataset, GenerateConfig, RandomConfig};
use crate::feasibility::{repair_row, FlInstance};
use crate::grid::{LoadProfile, PowerSystem};
use crate::milp::{solve_milp, Clock, MilpError};
use crate::predict::{raw_features, Model, PredictError};
use crate::scuc::{apply_reduction, build_scuc, PlanEntry, ReductionPlan, ScucError, ScucOptions};
use crate::Options;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scuc(#[from] ScucError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    DataGen(#[from] DataGenError),
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

/// Probability thresholds of the post-processing steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Decision boundary for hard labels.
    pub threshold: f64,
    pub always_on: f64,
    pub always_off: f64,
    pub fix_on: f64,
    pub fix_off: f64,
    pub use_fl: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { threshold: 0.5, always_on: 0.95, always_off: 0.05, fix_on: 0.90, fix_off: 0.10, use_fl: true }
    }
}

impl PipelineConfig {
    pub fn without_fl() -> Self {
        Self { use_fl: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let c = self;
        let on_ok = c.threshold <= c.fix_on && c.fix_on <= c.always_on && c.always_on <= 1.0;
        let off_ok = 0.0 <= c.always_off && c.always_off <= c.fix_off && c.fix_off <= 1.0 - c.threshold;
        if !(0.0..=1.0).contains(&c.threshold) || !on_ok || !off_ok {
            return Err(PipelineError::Config(format!(
                "thresholds must satisfy {} <= fix_on ({}) <= always_on ({}) <= 1 and 0 <= always_off ({}) <= fix_off ({}) <= {}",
                c.threshold,
                c.fix_on,
                c.always_on,
                c.always_off,
                c.fix_off,
                1.0 - c.threshold
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        if self.use_fl {
            "reduced-fl"
        } else {
            "reduced"
        }
    }
}

/// A reduction plan with the repair work spent building it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostProcessed {
    pub plan: ReductionPlan,
    /// Repair effort in clock units; zero without the layer.
    pub fl_time: f64,
    pub flips: usize,
}

fn step_one(row: &[f64], config: &PipelineConfig) -> Option<bool> {
    if row.iter().all(|&p| p >= config.always_on) {
        Some(true)
    } else if row.iter().all(|&p| p <= config.always_off) {
        Some(false)
    } else {
        None
    }
}

/// Builds the plan for one sample from its `[g][t]` probabilities: rows that
/// are confidently constant are fixed whole; other rows are repaired by the
/// feasibility layer, entries that are extreme and left unchanged by the
/// repair are fixed, and the rest stay free with the repaired value as warm
/// start.
pub fn postprocess(
    probabilities: &[Vec<f64>],
    system: &PowerSystem,
    options: &ScucOptions,
    config: &PipelineConfig,
    clock: Clock,
) -> Result<PostProcessed, PipelineError> {
    if !config.use_fl {
        return Ok(PostProcessed { plan: postprocess_no_fl(probabilities, config), fl_time: 0.0, flips: 0 });
    }
    let nt = system.horizon;
    let mut plan = ReductionPlan::empty(probabilities.len(), nt);
    let (mut fl_time, mut flips) = (0.0, 0);
    for (g, row) in probabilities.iter().enumerate() {
        if let Some(on) = step_one(row, config) {
            (0..nt).for_each(|t| plan.set(g, t, PlanEntry::Fixed(on)));
            continue;
        }
        let ml: Vec<u8> = row.iter().map(|&p| u8::from(p >= config.threshold)).collect();
        let gen = &system.generators[g];
        let res = repair_row(&FlInstance {
            generator: g,
            min_up: gen.min_up,
            min_down: gen.min_down,
            row: ml.clone(),
            initial_on: options.initial_state(g),
            carry_over: options.carry_over(system, g),
        })?;
        fl_time += match clock {
            Clock::Work => res.iterations as f64,
            Clock::Wall => res.solve_time,
        };
        flips += res.flips();
        for t in 0..nt {
            let extreme = row[t] >= config.fix_on || row[t] <= config.fix_off;
            let mf = res.u[t] == 1;
            let entry = if extreme && ml[t] == res.u[t] { PlanEntry::Fixed(mf) } else { PlanEntry::Flexible { warm: mf } };
            plan.set(g, t, entry);
        }
    }
    Ok(PostProcessed { plan, fl_time, flips })
}

/// The plan without repair: after the constant-row step, entries at or
/// beyond the fixing thresholds are fixed and the rest warm-start from the
/// hard label.
pub fn postprocess_no_fl(probabilities: &[Vec<f64>], config: &PipelineConfig) -> ReductionPlan {
    let nt = probabilities.first().map_or(0, Vec::len);
    let mut plan = ReductionPlan::empty(probabilities.len(), nt);
    for (g, row) in probabilities.iter().enumerate() {
        let whole = step_one(row, config);
        for (t, &p) in row.iter().enumerate() {
            let entry = match whole {
                Some(on) => PlanEntry::Fixed(on),
                None if p >= config.fix_on => PlanEntry::Fixed(true),
                None if p <= config.fix_off => PlanEntry::Fixed(false),
                None => PlanEntry::Flexible { warm: p >= config.threshold },
            };
            plan.set(g, t, entry);
        }
    }
    plan
}

/// Solver and bookkeeping settings shared by the experiment runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub solver: Options,
    pub clock: Clock,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { solver: Options::default(), clock: Clock::Work, jobs: 0 }
    }
}

/// The full-model result a reduced solve is compared with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub objective: f64,
    pub time: f64,
    pub free_binaries: usize,
}

pub fn solve_full(
    system: &PowerSystem,
    profile: &LoadProfile,
    options: &ScucOptions,
    experiment: &ExperimentConfig,
) -> Result<Option<Baseline>, PipelineError> {
    let (problem, _) = build_scuc(system, profile, options)?;
    let s = solve_milp(&problem, &experiment.solver)?;
    Ok(s.status.has_solution().then(|| Baseline {
        objective: s.objective,
        time: experiment.clock.measure(&s),
        free_binaries: problem.num_free_binaries(),
    }))
}

/// Solves the reduced model given by `post` and compares it with `baseline`.
/// An infeasible reduced model is recorded, not raised.
pub fn verify_sample(
    system: &PowerSystem,
    profile: &LoadProfile,
    options: &ScucOptions,
    post: &PostProcessed,
    baseline: &Baseline,
    sample_id: usize,
    experiment: &ExperimentConfig,
) -> Result<SampleRecord, PipelineError> {
    let (problem, index) = build_scuc(system, profile, options)?;
    let reduced = match apply_reduction(&problem, &index, &post.plan) {
        Ok(r) => r,
        // A fixing that contradicts a carry-over leaves nothing to solve.
        Err(ScucError::Milp(MilpError::FixingOutOfBounds { .. })) => {
            return Ok(SampleRecord::infeasible(sample_id, baseline, post, 0.0, problem.num_free_binaries()));
        }
        Err(e) => return Err(e.into()),
    };
    let mut solver = experiment.solver.clone();
    solver.warm_start = reduced.warm_start.clone();
    let s = solve_milp(&reduced.problem, &solver)?;
    let time = experiment.clock.measure(&s);
    let free = reduced.problem.num_free_binaries();
    if !s.status.has_solution() {
        return Ok(SampleRecord::infeasible(sample_id, baseline, post, time, free));
    }
    Ok(SampleRecord {
        sample_id,
        full_obj: baseline.objective,
        full_time: baseline.time,
        red_obj: Some(s.objective),
        red_time: time + post.fl_time,
        fl_time: post.fl_time,
        status: s.status.as_str().to_string(),
        fixed: post.plan.fixed_count(),
        flexible: post.plan.flexible_count(),
        flips: post.flips,
        full_binaries: baseline.free_binaries,
        reduced_binaries: free,
    })
}

/// One evaluation case: a profile with its identifier and, when already
/// known, the full-model result.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: usize,
    pub profile: LoadProfile,
    pub baseline: Option<Baseline>,
}

/// Runs every variant in `variants` on every case, sharing one full solve
/// per case. Cases whose full model is infeasible are skipped.
pub fn evaluate_cases(
    system: &PowerSystem,
    options: &ScucOptions,
    model: &Model<f64>,
    cases: &[Case],
    variants: &[PipelineConfig],
    experiment: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, PipelineError> {
    use rayon::prelude::*;
    for v in variants {
        v.validate()?;
    }
    let rows: Result<Vec<Option<Vec<SampleRecord>>>, PipelineError> = with_pool(experiment.jobs, || {
        cases
            .par_iter()
            .map(|case| {
                let baseline = match case.baseline {
                    Some(b) => b,
                    None => match solve_full(system, &case.profile, options, experiment)? {
                        Some(b) => b,
                        None => return Ok(None),
                    },
                };
                let x = raw_features(system, &case.profile, options.stochastic);
                let pred = model.predict(&[x], system.horizon)?;
                let probs = &pred.probabilities[0];
                variants
                    .iter()
                    .map(|cfg| {
                        let post = postprocess(probs, system, options, cfg, experiment.clock)?;
                        verify_sample(system, &case.profile, options, &post, &baseline, case.id, experiment)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            })
            .collect()
    })?;
    let rows = rows?;
    Ok(variants
        .iter()
        .enumerate()
        .map(|(k, cfg)| {
            let records = rows.iter().flatten().map(|r| r[k].clone()).collect();
            ExperimentReport::new(cfg.label(), *cfg, experiment.clock, records)
        })
        .collect())
}

/// Evaluates `variants` on the dataset's test split.
pub fn run_experiment(
    system: &PowerSystem,
    dataset: &Dataset,
    model: &Model<f64>,
    variants: &[PipelineConfig],
    experiment: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, PipelineError> {
    let cases: Vec<Case> = dataset
        .test_samples()
        .into_iter()
        .map(|s| Case { id: s.id, profile: s.profile(), baseline: None })
        .collect();
    evaluate_cases(system, &dataset.scuc, model, &cases, variants, experiment)
}

/// [`run_experiment`] for a scenario dataset, whose features are the
/// scenario net loads and whose reduction acts on the shared commitment.
pub fn run_stochastic_experiment(
    system: &PowerSystem,
    dataset: &Dataset,
    model: &Model<f64>,
    variants: &[PipelineConfig],
    experiment: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, PipelineError> {
    if !dataset.scuc.stochastic || system.num_scenarios() < 2 {
        return Err(PipelineError::Config("stochastic experiments need a scenario dataset with at least 2 scenarios".into()));
    }
    run_experiment(system, dataset, model, variants, experiment)
}

/// Draws `count` fresh feasible profiles at `random` (usually the wider
/// out-of-sample ranges) and evaluates the reduced model without and with
/// the feasibility layer.
pub fn out_of_sample(
    system: &PowerSystem,
    base: &LoadProfile,
    options: &ScucOptions,
    model: &Model<f64>,
    random: RandomConfig,
    count: usize,
    experiment: &ExperimentConfig,
) -> Result<(ExperimentReport, ExperimentReport), PipelineError> {
    let variants = [PipelineConfig::without_fl(), PipelineConfig::default()];
    let gen = GenerateConfig {
        random,
        samples: count,
        scuc: options.clone(),
        solver: experiment.solver.clone(),
        clock: experiment.clock,
        jobs: experiment.jobs,
        ..GenerateConfig::default()
    };
    let draws = if count == 0 {
        Vec::new()
    } else {
        with_pool(experiment.jobs, || collect_feasible(system, base, &gen, count))??.0
    };
    let (problem, _) = build_scuc(system, base, options)?;
    let free = problem.num_free_binaries();
    let cases: Vec<Case> = draws
        .into_iter()
        .enumerate()
        .map(|(id, d)| {
            let (_, objective, time) = d.solved.expect("kept draws are feasible");
            Case {
                id,
                profile: LoadProfile::new(d.demand),
                baseline: Some(Baseline { objective, time, free_binaries: free }),
            }
        })
        .collect();
    let mut reports = evaluate_cases(system, options, model, &cases, &variants, experiment)?;
    let with_fl = reports.pop().expect("two variants");
    let without = reports.pop().expect("two variants");
    Ok((without, with_fl))
}
