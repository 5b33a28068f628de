//! Power-system data model.
//!
//! Units are MW and hours; line susceptances are per-unit on
//! [`PowerSystem::base_mva`] (100 MVA unless the file says otherwise).

mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_profile, load_system, parse_profile, parse_system, save_profile, save_system, system_to_toml};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{path}: parse error at line {line}, column {column}: {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("load profile dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative demand {value} at bus {bus}, period {period}")]
    NegativeDemand { bus: u32, period: usize, value: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: u32,
    pub bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    /// $/MWh
    pub cost_linear: f64,
    /// $/h while committed
    pub cost_no_load: f64,
    /// $ per start
    pub cost_startup: f64,
    /// MW/h
    pub ramp_hourly: f64,
    pub ramp_startup: f64,
    pub ramp_shutdown: f64,
    /// Reserve deliverable within ten minutes, MW.
    pub ramp_10min: f64,
    pub min_up: usize,
    pub min_down: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: u32,
    /// Sending bus.
    pub from_bus: u32,
    /// Receiving bus.
    pub to_bus: u32,
    pub susceptance: f64,
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableUnit {
    pub id: u32,
    pub bus: u32,
    /// MW, indexed `[period][scenario]`.
    pub output: Vec<Vec<f64>>,
}

/// Validated system with resolved bus references.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSystem {
    pub name: String,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub renewables: Vec<RenewableUnit>,
    pub reference_bus: u32,
    pub horizon: usize,
    pub scenario_probabilities: Vec<f64>,
    pub base_mva: f64,
    bus_index: HashMap<u32, usize>,
}

impl PowerSystem {
    /// Validates the parts and resolves references. `reference_bus` defaults
    /// to the first bus.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        buses: Vec<Bus>,
        generators: Vec<Generator>,
        lines: Vec<Line>,
        renewables: Vec<RenewableUnit>,
        reference_bus: Option<u32>,
        horizon: usize,
        scenario_probabilities: Option<Vec<f64>>,
        base_mva: Option<f64>,
    ) -> Result<Self, GridError> {
        let invalid = |msg: String| Err(GridError::Invalid(msg));
        if buses.is_empty() {
            return invalid("system has no buses".into());
        }
        if horizon < 1 {
            return invalid("horizon must be at least 1".into());
        }
        let mut bus_index = HashMap::new();
        for (k, b) in buses.iter().enumerate() {
            if bus_index.insert(b.id, k).is_some() {
                return invalid(format!("duplicate bus id {}", b.id));
            }
        }
        let reference_bus = reference_bus.unwrap_or(buses[0].id);
        if !bus_index.contains_key(&reference_bus) {
            return invalid(format!("reference bus {reference_bus} does not exist"));
        }
        let probs = scenario_probabilities.unwrap_or_else(|| vec![1.0]);
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0)) {
            return invalid("scenario probabilities must be non-negative and non-empty".into());
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("scenario probabilities sum to {total}, expected 1"));
        }
        let base_mva = base_mva.unwrap_or(100.0);
        if !(base_mva > 0.0) {
            return invalid("base_mva must be positive".into());
        }

        let mut seen = std::collections::HashSet::new();
        for g in &generators {
            let name = format!("generator {}", g.id);
            if !seen.insert(g.id) {
                return invalid(format!("duplicate {name}"));
            }
            if !bus_index.contains_key(&g.bus) {
                return invalid(format!("{name} references missing bus {}", g.bus));
            }
            if !(0.0 <= g.p_min && g.p_min <= g.p_max && g.p_max.is_finite()) {
                return invalid(format!("{name}: requires 0 <= p_min <= p_max"));
            }
            let ramps = [g.ramp_hourly, g.ramp_startup, g.ramp_shutdown, g.ramp_10min];
            if ramps.iter().any(|&r| !(r >= 0.0)) {
                return invalid(format!("{name}: ramp limits must be non-negative"));
            }
            if g.min_up < 1 || g.min_down < 1 {
                return invalid(format!("{name}: min_up and min_down must be at least 1"));
            }
            if [g.cost_linear, g.cost_no_load, g.cost_startup].iter().any(|&c| !(c >= 0.0)) {
                return invalid(format!("{name}: costs must be non-negative"));
            }
        }
        seen.clear();
        for l in &lines {
            let name = format!("line {}", l.id);
            if !seen.insert(l.id) {
                return invalid(format!("duplicate {name}"));
            }
            for b in [l.from_bus, l.to_bus] {
                if !bus_index.contains_key(&b) {
                    return invalid(format!("{name} references missing bus {b}"));
                }
            }
            if l.from_bus == l.to_bus {
                return invalid(format!("{name} connects bus {} to itself", l.from_bus));
            }
            if !(l.flow_limit > 0.0) {
                return invalid(format!("{name}: flow_limit must be positive"));
            }
            if l.susceptance == 0.0 || !l.susceptance.is_finite() {
                return invalid(format!("{name}: susceptance must be non-zero"));
            }
        }
        seen.clear();
        for w in &renewables {
            let name = format!("renewable {}", w.id);
            if !seen.insert(w.id) {
                return invalid(format!("duplicate {name}"));
            }
            if !bus_index.contains_key(&w.bus) {
                return invalid(format!("{name} references missing bus {}", w.bus));
            }
            if w.output.len() != horizon || w.output.iter().any(|row| row.len() != probs.len()) {
                return invalid(format!("{name}: output must be {horizon} periods x {} scenarios", probs.len()));
            }
            if w.output.iter().flatten().any(|&p| !(p >= 0.0)) {
                return invalid(format!("{name}: outputs must be non-negative"));
            }
        }
        Ok(Self {
            name: name.into(),
            buses,
            generators,
            lines,
            renewables,
            reference_bus,
            horizon,
            scenario_probabilities: probs,
            base_mva,
            bus_index,
        })
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenario_probabilities.len()
    }

    /// Internal index of bus `id`.
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn reference_index(&self) -> usize {
        self.bus_index[&self.reference_bus]
    }

    pub fn generator_bus(&self, g: usize) -> usize {
        self.bus_index[&self.generators[g].bus]
    }

    /// Lines whose receiving end is bus `n` (internal index).
    pub fn incoming(&self, n: usize) -> Vec<usize> {
        let id = self.buses[n].id;
        (0..self.lines.len()).filter(|&k| self.lines[k].to_bus == id).collect()
    }

    /// Lines whose sending end is bus `n` (internal index).
    pub fn outgoing(&self, n: usize) -> Vec<usize> {
        let id = self.buses[n].id;
        (0..self.lines.len()).filter(|&k| self.lines[k].from_bus == id).collect()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Same system with a different scenario set for the renewables.
    pub fn with_scenarios(&self, probabilities: Vec<f64>, renewables: Vec<RenewableUnit>) -> Result<Self, GridError> {
        Self::new(
            self.name.clone(),
            self.buses.clone(),
            self.generators.clone(),
            self.lines.clone(),
            renewables,
            Some(self.reference_bus),
            self.horizon,
            Some(probabilities),
            Some(self.base_mva),
        )
    }

    /// Same network with a different horizon and no renewables.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self, GridError> {
        Self::new(
            self.name.clone(),
            self.buses.clone(),
            self.generators.clone(),
            self.lines.clone(),
            Vec::new(),
            Some(self.reference_bus),
            horizon,
            None,
            Some(self.base_mva),
        )
    }
}

/// Nodal demand, `[bus][period]` in MW (internal bus order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub demand: Vec<Vec<f64>>,
    /// Optional per-scenario net load, `[bus][period][scenario]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_net_load: Option<Vec<Vec<Vec<f64>>>>,
}

impl LoadProfile {
    pub fn new(demand: Vec<Vec<f64>>) -> Self {
        Self { demand, scenario_net_load: None }
    }

    pub fn validate_for(&self, system: &PowerSystem) -> Result<(), GridError> {
        if self.demand.len() != system.num_buses() {
            return Err(GridError::Dimension(format!(
                "{} bus rows for a {}-bus system",
                self.demand.len(),
                system.num_buses()
            )));
        }
        for (n, row) in self.demand.iter().enumerate() {
            if row.len() != system.horizon {
                return Err(GridError::Dimension(format!(
                    "bus {} has {} periods, horizon is {}",
                    system.buses[n].id,
                    row.len(),
                    system.horizon
                )));
            }
            for (t, &d) in row.iter().enumerate() {
                if !(d >= 0.0) {
                    return Err(GridError::NegativeDemand { bus: system.buses[n].id, period: t + 1, value: d });
                }
            }
        }
        Ok(())
    }

    pub fn total(&self, period: usize) -> f64 {
        self.demand.iter().map(|row| row[period]).sum()
    }

    /// Net load at bus `n`, period `t`, scenario `s`: demand minus renewable
    /// output at the bus.
    pub fn net_load(&self, system: &PowerSystem, n: usize, t: usize, s: usize) -> f64 {
        if let Some(net) = &self.scenario_net_load {
            return net[n][t][s];
        }
        let id = system.buses[n].id;
        let renewable: f64 = system.renewables.iter().filter(|w| w.bus == id).map(|w| w.output[t][s]).sum();
        self.demand[n][t] - renewable
    }
}
