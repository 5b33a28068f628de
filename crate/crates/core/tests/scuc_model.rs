mod common;

use common::{desk, scuc_brute_force};
use proptest::prelude::*;
use ucml::datagen::{perturb_profile, RandomConfig};
use ucml::grid::{parse_system, system_to_toml, LoadProfile, RenewableUnit};
use ucml::milp::{solve_milp, SolveOptions, SolveStatus, VarKind};
use ucml::scuc::{
    apply_reduction, build_scuc, check_min_updown, evaluate_schedule, extract_schedule, PlanEntry, ReductionPlan,
    ScucOptions,
};

fn exact() -> SolveOptions<f64> {
    SolveOptions::default().with_gap(0.0)
}

#[test]
fn full_model_matches_brute_force() {
    let (sys, base) = desk("desk3");
    let opts = ScucOptions::default();
    let cfg = RandomConfig { seed: 11, ..RandomConfig::default() };
    for m in 0..3 {
        let prof = perturb_profile(&base, &cfg, m);
        let (p, _) = build_scuc(&sys, &prof, &opts).unwrap();
        let s = solve_milp(&p, &exact()).unwrap();
        let oracle = scuc_brute_force(&sys, &prof, &opts).expect("desk profile is feasible");
        assert!((s.objective - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "draw {m}: {} vs {oracle}", s.objective);
    }
}

#[test]
fn solution_residuals_and_reserves() {
    let (sys, prof) = desk("desk3");
    let opts = ScucOptions::default();
    let (p, idx) = build_scuc(&sys, &prof, &opts).unwrap();
    let s = solve_milp(&p, &exact()).unwrap();
    let ex = extract_schedule(&s, &idx).unwrap();
    assert!(ex.schedule.startups_consistent(&idx.initial_on));
    assert!(check_min_updown(&ex.schedule, &sys, &opts).is_empty());
    for t in 0..sys.horizon {
        for (n, _) in sys.buses.iter().enumerate() {
            let gen: f64 = (0..sys.num_generators()).filter(|&g| sys.generator_bus(g) == n).map(|g| ex.dispatch[g][t][0]).sum();
            let inflow: f64 = sys.incoming(n).iter().map(|&k| ex.flows[k][t][0]).sum();
            let outflow: f64 = sys.outgoing(n).iter().map(|&k| ex.flows[k][t][0]).sum();
            assert!((gen + inflow - outflow - prof.demand[n][t]).abs() <= 1e-5);
        }
        for (k, line) in sys.lines.iter().enumerate() {
            let from = sys.bus_index(line.from_bus).unwrap();
            let to = sys.bus_index(line.to_bus).unwrap();
            let dc = sys.base_mva * line.susceptance * (ex.angles[from][t][0] - ex.angles[to][t][0]);
            assert!((ex.flows[k][t][0] - dc).abs() <= 1e-5);
            assert!(ex.flows[k][t][0].abs() <= line.flow_limit + 1e-6);
        }
        let total_r: f64 = (0..sys.num_generators()).map(|g| ex.reserves[g][t][0]).sum();
        for g in 0..sys.num_generators() {
            assert!(total_r + 1e-6 >= ex.dispatch[g][t][0] + ex.reserves[g][t][0]);
        }
    }
}

fn three_scenarios(sys: &ucml::grid::PowerSystem, outputs: [f64; 3]) -> ucml::grid::PowerSystem {
    let w = RenewableUnit { id: 1, bus: 2, output: vec![outputs.to_vec(); sys.horizon] };
    sys.with_scenarios(vec![1.0 / 3.0; 3], vec![w]).unwrap()
}

#[test]
fn stochastic_model_shares_commitment() {
    let (sys, prof) = desk("desk3");
    let stoch = three_scenarios(&sys, [0.0, 5.0, 10.0]);
    let (det, _) = build_scuc(&sys, &prof, &ScucOptions::default()).unwrap();
    let (p, idx) = build_scuc(&stoch, &prof, &ScucOptions::stochastic()).unwrap();
    assert_eq!(p.num_binaries(), det.num_binaries());
    assert_eq!(p.num_variables() - p.num_binaries(), 3 * (det.num_variables() - det.num_binaries()));
    assert_eq!(idx.scenarios, 3);
    let s = solve_milp(&p, &exact()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
}

#[test]
fn identical_scenarios_reduce_to_deterministic() {
    let (sys, prof) = desk("desk3");
    let stoch = three_scenarios(&sys, [6.0; 3]);
    let (p, _) = build_scuc(&stoch, &prof, &ScucOptions::stochastic()).unwrap();
    let sto = solve_milp(&p, &exact()).unwrap().objective;
    let mut net = prof.demand.clone();
    for v in net[1].iter_mut() {
        *v -= 6.0;
    }
    let (q, _) = build_scuc(&sys, &LoadProfile::new(net), &ScucOptions::default()).unwrap();
    let det = solve_milp(&q, &exact()).unwrap().objective;
    assert!((sto - det).abs() <= 1e-6 * det.max(1.0), "{sto} vs {det}");
}

#[test]
fn reduction_fixes_and_warm_starts() {
    let (sys, prof) = desk("desk3");
    let opts = ScucOptions::default();
    let (p, idx) = build_scuc(&sys, &prof, &opts).unwrap();
    let full = solve_milp(&p, &exact()).unwrap();
    let known = extract_schedule(&full, &idx).unwrap().schedule;

    let empty = apply_reduction(&p, &idx, &ReductionPlan::empty(3, 4)).unwrap();
    assert!(empty.warm_start.is_none());
    assert_eq!(empty.problem.num_free_binaries(), p.num_free_binaries());

    let mut plan = ReductionPlan::empty(3, 4);
    for g in 0..3 {
        for t in 0..4 {
            let on = known.is_on(g, t);
            plan.set(g, t, if g == 0 { PlanEntry::Fixed(on) } else { PlanEntry::Flexible { warm: on } });
        }
    }
    assert_eq!((plan.fixed_count(), plan.flexible_count()), (4, 8));
    let red = apply_reduction(&p, &idx, &plan).unwrap();
    assert_eq!(red.problem.num_free_binaries(), p.num_free_binaries() - 4);
    let warm = red.warm_start.clone().unwrap();
    assert_eq!(warm.len(), 24);
    for t in 0..4 {
        let j = idx.u[0][t];
        assert_eq!(red.problem.variables[j].lower, red.problem.variables[j].upper);
        assert_eq!(red.problem.variables[j].kind, VarKind::Binary);
    }
    let s = solve_milp(&red.problem, &exact().with_warm_start(warm)).unwrap();
    assert!((s.objective - full.objective).abs() <= 1e-6 * full.objective);

    let mut bad = ReductionPlan::empty(3, 4);
    bad.set(3, 0, PlanEntry::Fixed(true));
    assert!(apply_reduction(&p, &idx, &bad).is_err());
}

#[test]
fn evaluating_the_optimum_reproduces_its_cost() {
    let (sys, prof) = desk("desk3");
    let opts = ScucOptions::default();
    let (p, idx) = build_scuc(&sys, &prof, &opts).unwrap();
    let full = solve_milp(&p, &exact()).unwrap();
    let sched = extract_schedule(&full, &idx).unwrap().schedule;
    let eval = evaluate_schedule(&sys, &prof, &opts, &sched).unwrap();
    assert!((eval.objective - full.objective).abs() <= 1e-6 * full.objective);
}

#[test]
fn extraction_refuses_infeasible_solutions() {
    let (sys, prof) = desk("desk3");
    let huge = LoadProfile::new(prof.demand.iter().map(|r| r.iter().map(|d| d * 10.0).collect()).collect());
    let (p, idx) = build_scuc(&sys, &huge, &ScucOptions::default()).unwrap();
    let s = solve_milp(&p, &exact()).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(extract_schedule(&s, &idx).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn system_toml_round_trips(scale in 0.5f64..2.0, limit in 10.0f64..500.0, ut in 1usize..5) {
        let (sys, _) = desk("desk5");
        let mut text = system_to_toml(&sys);
        text = text.replace("flow_limit = 80.0", &format!("flow_limit = {limit}"));
        let mut parsed = parse_system(&text, "mem").unwrap();
        parsed.generators[0].p_max *= scale;
        parsed.generators[1].min_up = ut;
        let again = parse_system(&system_to_toml(&parsed), "mem").unwrap();
        prop_assert_eq!(again, parsed);
    }
}
