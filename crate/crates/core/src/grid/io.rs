use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Bus, Generator, GridError, Line, LoadProfile, PowerSystem, RenewableUnit};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    #[serde(default)]
    name: String,
    horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_bus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario_probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_mva: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    meta: Meta,
    buses: Vec<Bus>,
    #[serde(default)]
    generators: Vec<Generator>,
    #[serde(default)]
    lines: Vec<Line>,
    #[serde(default)]
    renewables: Vec<RenewableUnit>,
}

fn read(path: &Path) -> Result<String, GridError> {
    std::fs::read_to_string(path).map_err(|source| GridError::Io { path: path.display().to_string(), source })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses system text; `origin` labels parse errors.
pub fn parse_system(text: &str, origin: &str) -> Result<PowerSystem, GridError> {
    let file: SystemFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        GridError::Parse { path: origin.to_string(), line, column, msg: e.message().to_string() }
    })?;
    PowerSystem::new(
        file.meta.name,
        file.buses,
        file.generators,
        file.lines,
        file.renewables,
        file.meta.reference_bus,
        file.meta.horizon,
        file.meta.scenario_probabilities,
        file.meta.base_mva,
    )
}

pub fn load_system(path: impl AsRef<Path>) -> Result<PowerSystem, GridError> {
    let path = path.as_ref();
    parse_system(&read(path)?, &path.display().to_string())
}

pub fn system_to_toml(system: &PowerSystem) -> String {
    let file = SystemFile {
        meta: Meta {
            name: system.name.clone(),
            horizon: system.horizon,
            reference_bus: Some(system.reference_bus),
            scenario_probabilities: Some(system.scenario_probabilities.clone()),
            base_mva: Some(system.base_mva),
        },
        buses: system.buses.clone(),
        generators: system.generators.clone(),
        lines: system.lines.clone(),
        renewables: system.renewables.clone(),
    };
    toml::to_string(&file).expect("system serializes to TOML")
}

pub fn save_system(system: &PowerSystem, path: impl AsRef<Path>) -> Result<(), GridError> {
    let path = path.as_ref();
    std::fs::write(path, system_to_toml(system))
        .map_err(|source| GridError::Io { path: path.display().to_string(), source })
}

/// Parses a `bus,t1,...,tT` table. Every bus needs exactly one row.
pub fn parse_profile(text: &str, system: &PowerSystem) -> Result<LoadProfile, GridError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.get(0) != Some("bus") {
        return Err(GridError::Dimension("header must start with `bus`".into()));
    }
    if header.len() != system.horizon + 1 {
        return Err(GridError::Dimension(format!(
            "header has {} periods, horizon is {}",
            header.len() - 1,
            system.horizon
        )));
    }
    let mut demand: Vec<Option<Vec<f64>>> = vec![None; system.num_buses()];
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = k + 2;
        let bad = |msg: String| GridError::Dimension(format!("row {row_no}: {msg}"));
        let id: u32 = record
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("unreadable bus id".into()))?;
        let n = system.bus_index(id).ok_or_else(|| bad(format!("unknown bus {id}")))?;
        if record.len() != system.horizon + 1 {
            return Err(bad(format!("{} values, expected {}", record.len() - 1, system.horizon)));
        }
        let values: Vec<f64> = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(t, s)| s.parse::<f64>().map_err(|_| bad(format!("period {} value `{s}` is not a number", t + 1))))
            .collect::<Result<_, _>>()?;
        if demand[n].replace(values).is_some() {
            return Err(bad(format!("duplicate row for bus {id}")));
        }
    }
    let missing: Vec<String> = demand
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_none())
        .map(|(n, _)| system.buses[n].id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(GridError::Dimension(format!(
            "{} bus rows for a {}-bus system (missing {})",
            system.num_buses() - missing.len(),
            system.num_buses(),
            missing.join(", ")
        )));
    }
    let profile = LoadProfile::new(demand.into_iter().map(Option::unwrap).collect());
    profile.validate_for(system)?;
    Ok(profile)
}

pub fn load_profile(path: impl AsRef<Path>, system: &PowerSystem) -> Result<LoadProfile, GridError> {
    parse_profile(&read(path.as_ref())?, system)
}

pub fn save_profile(profile: &LoadProfile, system: &PowerSystem, path: impl AsRef<Path>) -> Result<(), GridError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["bus".to_string()];
    header.extend((1..=system.horizon).map(|t| format!("t{t}")));
    w.write_record(&header)?;
    for (n, row) in profile.demand.iter().enumerate() {
        let mut rec = vec![system.buses[n].id.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| GridError::Io { path: path.display().to_string(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[meta]
name = "three"
horizon = 2

[[buses]]
id = 1
[[buses]]
id = 2
[[buses]]
id = 3

[[generators]]
id = 1
bus = 1
p_min = 0.0
p_max = 50.0
cost_linear = 10.0
cost_no_load = 0.0
cost_startup = 0.0
ramp_hourly = 50.0
ramp_startup = 50.0
ramp_shutdown = 50.0
ramp_10min = 50.0
min_up = 1
min_down = 1

[[lines]]
id = 4
from_bus = 1
to_bus = 99
susceptance = 5.0
flow_limit = 10.0
"#;

    #[test]
    fn dangling_reference_reported() {
        let err = parse_system(SMALL, "small.toml").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn parse_error_has_location() {
        let text = "[meta]\nhorizon = \"two\"\n";
        match parse_system(text, "x.toml").unwrap_err() {
            GridError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn profile_rows_validated() {
        let sys = parse_system(&SMALL.replace("to_bus = 99", "to_bus = 2"), "s").unwrap();
        let ok = parse_profile("bus,t1,t2\n1,1,2\n2,3,4\n3,5,6\n", &sys).unwrap();
        assert_eq!(ok.demand[2], vec![5.0, 6.0]);
        let missing = parse_profile("bus,t1,t2\n1,1,2\n2,3,4\n", &sys).unwrap_err();
        assert!(matches!(missing, GridError::Dimension(_)));
        let neg = parse_profile("bus,t1,t2\n1,1,2\n2,-5.0,4\n3,5,6\n", &sys).unwrap_err();
        assert!(matches!(neg, GridError::NegativeDemand { bus: 2, period: 1, .. }));
    }
}
