mod common;

use std::collections::BTreeMap;

use common::{enumerate_milp, random_milp, vertex_enumeration_lp};
use proptest::prelude::*;
use ucml::milp::mps::{column_name, to_mps_string};
use ucml::milp::{fix_variables, solve_lp, solve_milp, BasisStatus, MilpProblem, Relation, SolveOptions, SolveStatus, VarKind};

fn exact() -> SolveOptions<f64> {
    SolveOptions::default().with_gap(0.0)
}

#[test]
fn random_milps_match_enumeration() {
    for seed in 0..40 {
        let p = random_milp(seed, 8, 6);
        let s = solve_milp(&p, &exact()).unwrap();
        match enumerate_milp(&p) {
            Some(best) => {
                assert!(s.status.has_solution(), "seed {seed}: {:?}", s.status);
                assert!((s.objective - best).abs() <= 1e-6, "seed {seed}: {} vs {best}", s.objective);
                assert!(p.max_violation(&s.values) <= 1e-6);
            }
            None => assert_eq!(s.status, SolveStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn lp_matches_vertex_enumeration() {
    for seed in 100..160 {
        let mut p = random_milp(seed, 3, 0).relaxed();
        for v in &mut p.variables {
            v.kind = VarKind::Continuous;
        }
        let s = solve_lp(&p).unwrap();
        match vertex_enumeration_lp(&p) {
            Some(best) => assert!((s.objective - best).abs() < 1e-7, "seed {seed}: {} vs {best}", s.objective),
            None => assert_eq!(s.status, SolveStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn lp_reduced_costs_are_sign_correct() {
    for seed in 200..260 {
        let p = random_milp(seed, 6, 8).relaxed();
        let s = solve_lp(&p).unwrap();
        let Some(cert) = s.certificate else { continue };
        for (d, st) in cert.reduced_costs.iter().zip(&cert.status) {
            match st {
                BasisStatus::AtLower => assert!(*d >= -1e-7, "seed {seed}: {d}"),
                BasisStatus::AtUpper => assert!(*d <= 1e-7, "seed {seed}: {d}"),
                BasisStatus::Free => assert!(d.abs() <= 1e-7),
                BasisStatus::Basic | BasisStatus::Fixed => {}
            }
        }
    }
}

#[test]
fn mps_output_is_deterministic_and_binary_marked() {
    let p = random_milp(3, 5, 3);
    let a = to_mps_string(&p).unwrap();
    let b = to_mps_string(&p).unwrap();
    assert_eq!(a, b);
    let bin = column_name(0);
    assert!(a.lines().any(|l| l.starts_with(" UP BND") && l.contains(&bin)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn incumbents_never_worsen(seed in 0u64..10_000) {
        let p = random_milp(seed, 10, 6);
        let s = solve_milp(&p, &exact()).unwrap();
        for w in s.incumbent_trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn solving_is_deterministic(seed in 0u64..10_000) {
        let p = random_milp(seed, 10, 6);
        let a = solve_milp(&p, &SolveOptions::default()).unwrap();
        let b = solve_milp(&p, &SolveOptions::default()).unwrap();
        prop_assert_eq!(a.values, b.values);
        prop_assert_eq!(a.nodes_explored, b.nodes_explored);
        prop_assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn warm_start_is_sound(seed in 0u64..10_000) {
        let p = random_milp(seed, 9, 6);
        let cold = solve_milp(&p, &exact()).unwrap();
        prop_assume!(cold.status.has_solution());
        // First feasible binary pattern in enumeration order, usually not optimal.
        let bins: Vec<usize> = (0..p.num_variables()).filter(|&j| p.variables[j].kind == VarKind::Binary).collect();
        let mut warm = None;
        for mask in 0u64..(1 << bins.len()) {
            let fix: BTreeMap<usize, f64> =
                bins.iter().enumerate().map(|(k, &j)| (j, ((mask >> k) & 1) as f64)).collect();
            let lp = solve_lp(&fix_variables(&p, &fix).unwrap()).unwrap();
            if lp.status.has_solution() {
                warm = Some((fix, lp.objective));
                break;
            }
        }
        let (fix, warm_obj) = warm.unwrap();
        let s = solve_milp(&p, &SolveOptions::default().with_warm_start(fix)).unwrap();
        let tol = 1e-9 * warm_obj.abs().max(1.0);
        prop_assert!(s.incumbent_trace[0] <= warm_obj + tol);
        prop_assert!(s.objective <= warm_obj + tol);
        prop_assert!(s.objective - cold.objective <= 1e-4 * cold.objective.abs().max(1e-10) + 1e-9);
    }
}

#[test]
fn equality_constrained_binary_parity_is_infeasible() {
    let mut p = MilpProblem::<f64>::new("parity");
    let v: Vec<usize> = (0..5).map(|i| p.add_binary(format!("b{i}"))).collect();
    p.add_constraint("odd", v.iter().map(|&j| (j, 2.0)).collect(), Relation::Equal, 3.0);
    assert_eq!(solve_milp(&p, &exact()).unwrap().status, SolveStatus::Infeasible);
}
