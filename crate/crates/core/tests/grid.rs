mod common;

use common::data_path;
use ucml::grid::{load_profile, load_system, parse_profile, GridError};
use ucml::milp::mps::to_mps_string;
use ucml::scuc::{build_scuc, ScucOptions};

#[test]
fn rts24_descriptor_and_profile() {
    let sys = load_system(data_path("ieee_rts24.toml")).unwrap();
    assert_eq!((sys.num_buses(), sys.num_generators(), sys.num_lines()), (24, 33, 38));
    let cap: f64 = sys.generators.iter().map(|g| g.p_max).sum();
    assert_eq!(cap, 3405.0);

    let prof = load_profile(data_path("ieee_rts24_load.csv"), &sys).unwrap();
    assert_eq!((prof.demand.len(), prof.demand[0].len()), (24, 24));
    let peak = (0..24).map(|t| prof.demand.iter().map(|r| r[t]).sum::<f64>()).fold(0.0, f64::max);
    assert!((peak - 2850.0).abs() < 1e-6);

    let (p, idx) = build_scuc(&sys, &prof, &ScucOptions::default()).unwrap();
    assert_eq!(p.num_binaries(), 2 * 33 * 24);
    assert_eq!(idx.flow.len(), 38);
    let text = to_mps_string(&p).unwrap();
    assert_eq!(text.matches("'MARKER'").count(), 2);
}

#[test]
fn profile_shape_and_sign_errors() {
    let sys = load_system(data_path("ieee_rts24.toml")).unwrap();
    let text = std::fs::read_to_string(data_path("ieee_rts24_load.csv")).unwrap();
    let short: String = text.lines().take(24).map(|l| format!("{l}\n")).collect();
    assert!(matches!(parse_profile(&short, &sys), Err(GridError::Dimension(_))));
    let negative = text.replacen("\n1,72.36,", "\n1,-5.0,", 1);
    assert!(matches!(parse_profile(&negative, &sys), Err(GridError::NegativeDemand { bus: 1, period: 1, .. })));
}
