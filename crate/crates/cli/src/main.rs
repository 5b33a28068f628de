mod config;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use ucml::datagen::{generate_dataset, load_dataset, save_dataset, Dataset, GenerateConfig, RandomConfig};
use ucml::grid::{load_profile, load_system, PowerSystem};
use ucml::milp::mps::export_mps;
use ucml::milp::Clock;
use ucml::pipeline::{out_of_sample, run_experiment, run_stochastic_experiment, write_reports, ExperimentConfig, PipelineConfig};
use ucml::predict::{
    accuracy, confusion, examples_from_dataset, load_model, save_model, tune, write_loss_curve, Model, ModelKind,
    TrainConfig,
};
use ucml::scuc::{build_scuc, ScucOptions};
use ucml::Options;

use config::FileConfig;

#[derive(Parser)]
#[command(name = "ucml", version, about = "Learned commitment prediction and model reduction for SCUC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw perturbed load profiles, solve each SCUC and save the dataset.
    Generate(GenerateArgs),
    /// Fit a commitment predictor on a dataset's training split.
    Train(TrainArgs),
    /// Compare full and reduced models on test or fresh out-of-sample cases.
    Verify(VerifyArgs),
    /// Write the full SCUC model of one load profile in MPS format.
    Export(ExportArgs),
}

#[derive(Args)]
struct Common {
    /// TOML settings file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    clock: Option<ClockArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative MIP gap.
    #[arg(long, allow_negative_numbers = true)]
    gap: Option<f64>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    load: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Build the scenario model with a shared commitment.
    #[arg(long)]
    stochastic: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Learning rates to try, comma separated.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Hidden width of the MLP.
    #[arg(long)]
    hidden: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    fl: Option<FlArg>,
    /// Out-of-sample draws.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    load: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stochastic: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ClockArg {
    Work,
    Wall,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModelArg {
    Mtlr,
    Mlp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    InSample,
    Oos,
    Stochastic,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FlArg {
    On,
    Off,
    Both,
}

enum Fail {
    /// Bad input or usage: exit code 2.
    Input(String),
    /// The computation itself failed: exit code 1.
    Compute(String),
}

fn input<T, E: Display>(r: Result<T, E>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Input(e.to_string()))
}

fn compute<T, E: Display>(r: Result<T, E>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Compute(e.to_string()))
}

fn parse_enum<E: ValueEnum>(flag: Option<E>, file: Option<&String>, key: &str) -> Result<Option<E>, Fail> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.map(|s| E::from_str(s, true).map_err(|_| Fail::Input(format!("config: invalid {key} `{s}`")))).transpose()
}

struct Resolved {
    file: FileConfig,
    jobs: usize,
    clock: Clock,
    seed: Option<u64>,
    solver: Options,
}

fn resolve(common: &Common) -> Result<Resolved, Fail> {
    let file = FileConfig::load(common.config.as_deref()).map_err(Fail::Input)?;
    let clock = match parse_enum(common.clock, file.clock.as_ref(), "clock")? {
        Some(ClockArg::Wall) => Clock::Wall,
        _ => Clock::Work,
    };
    let gap = common.gap.or(file.gap).unwrap_or(Options::default().mip_gap);
    if !(0.0..1.0).contains(&gap) {
        return Err(Fail::Input(format!("gap must lie in [0, 1), got {gap}")));
    }
    Ok(Resolved {
        jobs: common.jobs.or(file.jobs).unwrap_or(0),
        clock,
        seed: common.seed.or(file.seed),
        solver: Options::default().with_gap(gap),
        file,
    })
}

fn write_manifest(path: &Path, command: &str, config: serde_json::Value) -> Result<(), Fail> {
    let doc = json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "config": config });
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    input(std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display())))
}

fn system(path: &Path) -> Result<PowerSystem, Fail> {
    input(load_system(path))
}

fn dataset(path: &Path, sys: &PowerSystem) -> Result<Dataset, Fail> {
    input(load_dataset(path, sys))
}

fn generate(a: &GenerateArgs) -> Result<(), Fail> {
    let r = resolve(&a.common)?;
    let f = &r.file;
    let sys = system(&a.system)?;
    let base = input(load_profile(&a.load, &sys))?;
    let defaults = RandomConfig::default();
    let random = RandomConfig {
        alpha: a.alpha.or(f.alpha).unwrap_or(defaults.alpha),
        beta: a.beta.or(f.beta).unwrap_or(defaults.beta),
        seed: r.seed.unwrap_or(defaults.seed),
    };
    input(random.validate())?;
    let stochastic = a.stochastic || f.stochastic.unwrap_or(false);
    let gen = GenerateConfig {
        random,
        samples: a.samples.or(f.samples).unwrap_or(GenerateConfig::default().samples),
        train_fraction: a.train_fraction.or(f.train_fraction).unwrap_or(GenerateConfig::default().train_fraction),
        scuc: if stochastic { ScucOptions::stochastic() } else { ScucOptions::default() },
        solver: r.solver.clone(),
        clock: r.clock,
        jobs: r.jobs,
    };
    if gen.samples < 2 || !(gen.train_fraction > 0.0 && gen.train_fraction < 1.0) {
        return Err(Fail::Input("need at least 2 samples and a train fraction strictly between 0 and 1".into()));
    }
    let ds = compute(generate_dataset(&sys, &base, &gen))?;
    compute(save_dataset(&ds, &sys, &a.out))?;
    println!(
        "{} samples ({} train, {} test, {} infeasible draws discarded) -> {}",
        ds.samples.len(),
        ds.train.len(),
        ds.test.len(),
        ds.discarded,
        a.out.display()
    );
    write_manifest(
        &a.out.join("generate_manifest.json"),
        "generate",
        json!({ "system": a.system, "load": a.load, "generate": gen }),
    )
}

fn train(a: &TrainArgs) -> Result<(), Fail> {
    let r = resolve(&a.common)?;
    let f = &r.file;
    let sys = system(&a.system)?;
    let ds = dataset(&a.dataset, &sys)?;
    let kind = match parse_enum(a.model, f.model.as_ref(), "model")?.unwrap_or(ModelArg::Mtlr) {
        ModelArg::Mtlr => ModelKind::Mtlr,
        ModelArg::Mlp => ModelKind::Mlp,
    };
    let d = TrainConfig::<f64>::default();
    let cfg = TrainConfig {
        sweep: a.sweep.clone().or_else(|| f.sweep.clone()).unwrap_or(d.sweep.clone()),
        iterations: a.iterations.or(f.iterations).unwrap_or(d.iterations),
        hidden: a.hidden.or(f.hidden),
        seed: r.seed.unwrap_or(d.seed),
        ..d
    };
    input(cfg.validate())?;
    let ex = examples_from_dataset(&sys, &ds, &ds.train);
    let tuned = compute(tune(kind, &ex, &cfg))?;
    let model = tuned.model;

    input(std::fs::create_dir_all(a.out.join("loss_curves")).map_err(|e| format!("{}: {e}", a.out.display())))?;
    compute(save_model(&model, a.out.join("model.json")))?;
    compute(write_loss_curve(model.loss_curve(), a.out.join("loss.csv")))?;
    for point in &tuned.curves {
        compute(write_loss_curve(&point.losses, a.out.join(format!("loss_curves/lr_{}.csv", point.learning_rate))))?;
    }

    let truth = |ids: &[usize]| -> Vec<Vec<Vec<u8>>> { ids.iter().map(|&i| ds.samples[i].schedule.u.clone()).collect() };
    let predict = |ids: &[usize]| {
        let ex = examples_from_dataset(&sys, &ds, ids);
        compute(model.predict(&ex.inputs, sys.horizon))
    };
    let (train_pred, test_pred) = (predict(&ds.train)?, predict(&ds.test)?);
    let (train_truth, test_truth) = (truth(&ds.train), truth(&ds.test));
    let test_acc = accuracy(&test_pred.labels(), &test_truth);
    let metrics = json!({
        "model": kind,
        "learning_rate": model.learning_rate(),
        "train_accuracy": accuracy(&train_pred.labels(), &train_truth),
        "test_accuracy": test_acc,
        "test_confusion": confusion(&test_pred.labels(), &test_truth),
        "sweep": tuned.curves.iter().map(|c| json!({
            "learning_rate": c.learning_rate,
            "train_accuracy": c.train_accuracy,
            "monotone": c.monotone,
            "diverged": c.diverged,
            "final_loss": c.losses.last(),
        })).collect::<Vec<_>>(),
    });
    let path = a.out.join("metrics.json");
    input(std::fs::write(&path, serde_json::to_string_pretty(&metrics).expect("json") + "\n").map_err(|e| format!("{}: {e}", path.display())))?;

    let path = a.out.join("predictions.csv");
    let mut text = String::from("split,sample_id,generator,period,probability,predicted,actual\n");
    for (split, ids, pred, tr) in [("train", &ds.train, &train_pred, &train_truth), ("test", &ds.test, &test_pred, &test_truth)] {
        let labels = pred.labels();
        for (k, &id) in ids.iter().enumerate() {
            for g in 0..sys.num_generators() {
                for t in 0..sys.horizon {
                    let p = pred.probabilities[k][g][t];
                    text += &format!("{split},{id},{},{},{p},{},{}\n", g + 1, t + 1, labels[k][g][t], tr[k][g][t]);
                }
            }
        }
    }
    input(std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())))?;
    println!("{kind:?} model, learning rate {}, test accuracy {test_acc:.4} -> {}", model.learning_rate(), a.out.display());
    write_manifest(
        &a.out.join("train_manifest.json"),
        "train",
        json!({ "system": a.system, "dataset": a.dataset, "model": kind, "train": cfg }),
    )
}

fn verify(a: &VerifyArgs) -> Result<(), Fail> {
    let r = resolve(&a.common)?;
    let f = &r.file;
    let sys = system(&a.system)?;
    let ds = dataset(&a.dataset, &sys)?;
    let model: Model<f64> = input(load_model(&a.model))?;
    let mode = parse_enum(a.mode, f.mode.as_ref(), "mode")?.unwrap_or(ModeArg::InSample);
    let fl = parse_enum(a.fl, f.fl.as_ref(), "fl")?.unwrap_or(FlArg::Both);
    let variants: Vec<PipelineConfig> = match fl {
        FlArg::On => vec![PipelineConfig::default()],
        FlArg::Off => vec![PipelineConfig::without_fl()],
        FlArg::Both => vec![PipelineConfig::without_fl(), PipelineConfig::default()],
    };
    let exp = ExperimentConfig { solver: r.solver.clone(), clock: r.clock, jobs: r.jobs };
    let oos = RandomConfig::out_of_sample(r.seed.unwrap_or(RandomConfig::default().seed));
    let oos = RandomConfig { alpha: a.alpha.or(f.alpha).unwrap_or(oos.alpha), beta: a.beta.or(f.beta).unwrap_or(oos.beta), ..oos };
    let count = a.count.or(f.count).unwrap_or(100);
    let reports = match mode {
        ModeArg::InSample => compute(run_experiment(&sys, &ds, &model, &variants, &exp))?,
        ModeArg::Stochastic => input(run_stochastic_experiment(&sys, &ds, &model, &variants, &exp))?,
        ModeArg::Oos => {
            input(oos.validate())?;
            let (plain, with) = compute(out_of_sample(&sys, &ds.base_profile, &ds.scuc, &model, oos, count, &exp))?;
            match fl {
                FlArg::On => vec![with],
                FlArg::Off => vec![plain],
                FlArg::Both => vec![plain, with],
            }
        }
    };
    compute(write_reports(&reports, &a.out))?;
    for rep in &reports {
        let s = rep.summary;
        let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<11} cases {:>4}  infeasible {:>3}  BN cost {}  BN time {}  speed-up {}",
            rep.variant,
            s.samples,
            s.infeasible,
            show(s.bn_cost),
            show(s.bn_time),
            show(s.speedup)
        );
    }
    let mut config = json!({
        "system": a.system, "dataset": a.dataset, "model": a.model, "mode": mode, "fl": fl,
        "variants": variants, "experiment": exp,
    });
    if mode == ModeArg::Oos {
        config["out_of_sample"] = json!({ "random": oos, "count": count });
    }
    write_manifest(&a.out.join("verify_manifest.json"), "verify", config)
}

fn export(a: &ExportArgs) -> Result<(), Fail> {
    let sys = system(&a.system)?;
    let prof = input(load_profile(&a.load, &sys))?;
    let opts = if a.stochastic { ScucOptions::stochastic() } else { ScucOptions::default() };
    let (problem, _) = input(build_scuc(&sys, &prof, &opts))?;
    compute(export_mps(&problem, &a.out))?;
    println!(
        "{} rows, {} columns ({} binary) -> {}",
        problem.constraints.len(),
        problem.num_variables(),
        problem.num_binaries(),
        a.out.display()
    );
    write_manifest(
        &a.out.with_extension("manifest.json"),
        "export",
        json!({ "system": a.system, "load": a.load, "stochastic": a.stochastic }),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Verify(a) => verify(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
