mod common;

use common::desk;
use proptest::prelude::*;
use ucml::datagen::{generate_dataset, GenerateConfig, RandomConfig};
use ucml::grid::{Bus, Generator, LoadProfile, PowerSystem};
use ucml::milp::{solve_milp, Clock};
use ucml::pipeline::{
    out_of_sample, postprocess, postprocess_no_fl, run_experiment, solve_full, verify_sample, write_reports,
    ExperimentConfig, PipelineConfig,
};
use ucml::predict::{examples_from_dataset, train_mtlr, FeatureSpec, Model, MtlrModel, TrainConfig};
use ucml::scuc::{build_scuc, check_row, evaluate_schedule, extract_schedule, PlanEntry, ScucOptions};

fn exp() -> ExperimentConfig {
    ExperimentConfig { jobs: 2, ..ExperimentConfig::default() }
}

fn probs_from(u: &[Vec<u8>], on: f64) -> Vec<Vec<f64>> {
    u.iter().map(|r| r.iter().map(|&x| if x == 1 { on } else { 1.0 - on }).collect()).collect()
}

#[test]
fn perfect_predictions_reproduce_the_optimum() {
    let (sys, prof) = desk("desk5");
    let opts = ScucOptions::default();
    let (p, idx) = build_scuc(&sys, &prof, &opts).unwrap();
    let full = solve_milp(&p, &exp().solver).unwrap();
    let u = extract_schedule(&full, &idx).unwrap().schedule.u;
    let base = solve_full(&sys, &prof, &opts, &exp()).unwrap().unwrap();
    for cfg in [PipelineConfig::default(), PipelineConfig::without_fl()] {
        let post = postprocess(&probs_from(&u, 0.99), &sys, &opts, &cfg, Clock::Work).unwrap();
        assert_eq!(post.plan.flexible_count(), 0);
        let rec = verify_sample(&sys, &prof, &opts, &post, &base, 0, &exp()).unwrap();
        let red = rec.red_obj.unwrap();
        assert!((red - full.objective).abs() <= 1e-6 * full.objective);
        assert_eq!(rec.reduced_binaries, rec.full_binaries - 60);
    }
}

#[test]
fn undecided_plan_matches_full_within_gap() {
    let (sys, prof) = desk("desk3");
    let opts = ScucOptions::default();
    let base = solve_full(&sys, &prof, &opts, &exp()).unwrap().unwrap();
    let post = postprocess(&vec![vec![0.5; 4]; 3], &sys, &opts, &PipelineConfig::default(), Clock::Work).unwrap();
    assert_eq!(post.plan.fixed_count(), 0);
    let rec = verify_sample(&sys, &prof, &opts, &post, &base, 0, &exp()).unwrap();
    let red = rec.red_obj.unwrap();
    assert!((red - base.objective).abs() <= 1e-4 * base.objective);
    assert_eq!(rec.reduced_binaries, rec.full_binaries);
}

fn pair() -> PowerSystem {
    let g = |id| Generator {
        id,
        bus: 1,
        p_min: 0.0,
        p_max: 100.0,
        cost_linear: 10.0 * f64::from(id),
        cost_no_load: 0.0,
        cost_startup: 0.0,
        ramp_hourly: 100.0,
        ramp_startup: 100.0,
        ramp_shutdown: 100.0,
        ramp_10min: 100.0,
        min_up: 1,
        min_down: 1,
    };
    PowerSystem::new("pair", vec![Bus { id: 1, name: String::new() }], vec![g(1), g(2)], vec![], vec![], None, 2, None, None)
        .unwrap()
}

#[test]
fn fixing_a_needed_unit_off_is_recorded_infeasible() {
    let sys = pair();
    let prof = LoadProfile::new(vec![vec![80.0, 60.0]]);
    let opts = ScucOptions::default();
    let base = solve_full(&sys, &prof, &opts, &exp()).unwrap().unwrap();
    let probs = vec![vec![0.99, 0.99], vec![0.01, 0.01]];
    let post = postprocess(&probs, &sys, &opts, &PipelineConfig::default(), Clock::Work).unwrap();
    let rec = verify_sample(&sys, &prof, &opts, &post, &base, 7, &exp()).unwrap();
    assert!(!rec.feasible());
    assert_eq!((rec.sample_id, rec.status.as_str()), (7, "infeasible"));
}

#[test]
fn postprocess_examples() {
    let (sys, _) = desk("desk5");
    let opts = ScucOptions::default();
    let cfg = PipelineConfig::default();
    let all_on = vec![vec![0.97; 12]; 5];
    let plan = postprocess(&all_on, &sys, &opts, &cfg, Clock::Work).unwrap().plan;
    assert_eq!((plan.fixed_count(), plan.flexible_count()), (60, 0));

    // Generator 1 has UT = 4: a lone confident ON period is cheaper to drop.
    let mut probs = vec![vec![0.5; 12]; 5];
    probs[0] = std::iter::once(0.92).chain(std::iter::repeat_n(0.08, 11)).collect();
    let post = postprocess(&probs, &sys, &opts, &cfg, Clock::Work).unwrap();
    assert_eq!(post.plan.get(0, 0), Some(PlanEntry::Flexible { warm: false }));
    assert_eq!(post.plan.get(0, 1), Some(PlanEntry::Fixed(false)));
    assert_eq!(post.plan.get(2, 5), Some(PlanEntry::Flexible { warm: true }));
    assert_eq!(post.flips, 1);
    assert!(post.fl_time > 0.0);

    let plain = postprocess_no_fl(&probs, &PipelineConfig::without_fl());
    assert_eq!(plain.get(0, 0), Some(PlanEntry::Fixed(true)));
    assert_eq!(plain.get(2, 5), Some(PlanEntry::Flexible { warm: true }));
}

#[test]
fn layer_is_a_no_op_on_feasible_rows() {
    let (sys, _) = desk("desk5");
    let row: Vec<f64> = (0..12).map(|t| if t < 6 { 0.93 } else { 0.07 }).collect();
    let probs = vec![row; 5];
    let with = postprocess(&probs, &sys, &ScucOptions::default(), &PipelineConfig::default(), Clock::Work).unwrap();
    assert_eq!(with.flips, 0);
    assert_eq!(with.plan, postprocess_no_fl(&probs, &PipelineConfig::without_fl()));
}

fn prob_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 12), 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stricter_thresholds_fix_fewer(probs in prob_matrix(), use_fl: bool) {
        let (sys, _) = desk("desk5");
        let loose = PipelineConfig { use_fl, ..PipelineConfig::default() };
        let strict = PipelineConfig { fix_on: 0.95, fix_off: 0.05, always_on: 0.99, always_off: 0.01, ..loose };
        let a = postprocess(&probs, &sys, &ScucOptions::default(), &loose, Clock::Work).unwrap().plan;
        let b = postprocess(&probs, &sys, &ScucOptions::default(), &strict, Clock::Work).unwrap().plan;
        for g in 0..5 {
            for t in 0..12 {
                if let Some(PlanEntry::Fixed(v)) = b.get(g, t) {
                    prop_assert_eq!(a.get(g, t), Some(PlanEntry::Fixed(v)));
                }
            }
        }
    }

    #[test]
    fn fully_fixed_rows_pass_min_updown(probs in prob_matrix()) {
        let (sys, _) = desk("desk5");
        let plan = postprocess(&probs, &sys, &ScucOptions::default(), &PipelineConfig::default(), Clock::Work).unwrap().plan;
        for (g, gen) in sys.generators.iter().enumerate() {
            let row: Option<Vec<u8>> = (0..12).map(|t| match plan.get(g, t) {
                Some(PlanEntry::Fixed(v)) => Some(u8::from(v)),
                _ => None,
            }).collect();
            if let Some(row) = row {
                prop_assert!(check_row(&row, gen.min_up, gen.min_down, false).is_empty());
            }
        }
    }
}

#[test]
fn reduced_solve_beats_its_warm_start() {
    let (sys, base) = desk("desk5");
    let opts = ScucOptions::default();
    let cfg = RandomConfig { seed: 5, ..RandomConfig::default() };
    let mut rng_probs = 0.1f64;
    for m in 0..4 {
        let prof = ucml::datagen::perturb_profile(&base, &cfg, m);
        let probs: Vec<Vec<f64>> = (0..5)
            .map(|g| {
                (0..12)
                    .map(|t| {
                        rng_probs = (rng_probs * 7.3 + 0.17 * (g + t) as f64).fract();
                        if g < 2 { 0.97 } else { rng_probs }
                    })
                    .collect()
            })
            .collect();
        let post = postprocess(&probs, &sys, &opts, &PipelineConfig::default(), Clock::Work).unwrap();
        let u: Vec<Vec<u8>> =
            (0..5).map(|g| (0..12).map(|t| u8::from(post.plan.value(g, t) == Some(true))).collect()).collect();
        let warm = ucml::scuc::CommitmentSchedule::from_u(u, &[false; 5]);
        let warm_cost = evaluate_schedule(&sys, &prof, &opts, &warm).unwrap();
        let base_line = solve_full(&sys, &prof, &opts, &exp()).unwrap().unwrap();
        let rec = verify_sample(&sys, &prof, &opts, &post, &base_line, m as usize, &exp()).unwrap();
        if warm_cost.status.has_solution() {
            assert!(rec.red_obj.unwrap() <= warm_cost.objective * (1.0 + 1e-9));
        }
    }
}

#[test]
fn experiment_reports_are_consistent() {
    let (sys, base) = desk("desk3");
    let gen = GenerateConfig { samples: 20, random: RandomConfig { seed: 2, ..RandomConfig::default() }, jobs: 2, ..GenerateConfig::default() };
    let ds = generate_dataset(&sys, &base, &gen).unwrap();
    let model = Model::Mtlr(train_mtlr(&examples_from_dataset(&sys, &ds, &ds.train), &TrainConfig::default()).unwrap());
    let reports =
        run_experiment(&sys, &ds, &model, &[PipelineConfig::without_fl(), PipelineConfig::default()], &exp()).unwrap();
    assert_eq!(reports.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    write_reports(&reports, dir.path()).unwrap();
    for r in &reports {
        assert_eq!(r.records.len(), ds.test.len());
        let ids: Vec<usize> = r.records.iter().map(|s| s.sample_id).collect();
        assert_eq!(ids, ds.test);
        let mut rdr = csv::Reader::from_path(dir.path().join(format!("{}_samples.csv", r.variant))).unwrap();
        let infeasible = rdr.records().filter(|row| &row.as_ref().unwrap()[6] == "infeasible").count();
        assert_eq!(infeasible, r.summary.infeasible);
        let bn: f64 = r.records.iter().filter_map(|s| s.red_obj.map(|o| o / s.full_obj)).sum::<f64>()
            / r.records.iter().filter(|s| s.feasible()).count() as f64;
        assert!((bn - r.summary.bn_cost.unwrap()).abs() < 1e-12);
        assert!((r.summary.speedup.unwrap() * r.summary.bn_time.unwrap() - 1.0).abs() < 1e-12);
        for s in &r.records {
            if s.fixed > 0 {
                assert!(s.reduced_binaries < s.full_binaries);
            }
        }
    }
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("cost_bars.csv").exists());
}

#[test]
fn empty_out_of_sample_run() {
    let (sys, base) = desk("desk3");
    let spec = FeatureSpec::fit(&[vec![0.0; 8], vec![1.0; 8]]).unwrap();
    let model = Model::Mtlr(MtlrModel::zeros(spec, 12));
    let (a, b) =
        out_of_sample(&sys, &base, &ScucOptions::default(), &model, RandomConfig::out_of_sample(1), 0, &exp()).unwrap();
    assert_eq!((a.summary.samples, b.summary.samples), (0, 0));
    assert_eq!(a.summary.bn_cost, None);
}
