//! Dataset directories: `manifest.json`, `demands.csv`, `schedules.csv` and
//! `startups.csv`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataGenError, Dataset, RandomConfig, Sample};
use crate::grid::{LoadProfile, PowerSystem};
use crate::milp::Clock;
use crate::scuc::{CommitmentSchedule, ScucOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SampleMeta {
    id: usize,
    draw: u64,
    objective: f64,
    solve_time: f64,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    system: String,
    buses: usize,
    generators: usize,
    horizon: usize,
    random: RandomConfig,
    scuc: ScucOptions,
    clock: Clock,
    samples: usize,
    discarded: usize,
    train: Vec<usize>,
    test: Vec<usize>,
    base_profile: LoadProfile,
    records: Vec<SampleMeta>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataGenError + '_ {
    move |source| DataGenError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> DataGenError {
    DataGenError::Format { path: path.display().to_string(), msg: e.to_string() }
}

fn write_matrix_rows(
    path: &Path,
    key: &str,
    horizon: usize,
    rows: impl Iterator<Item = (usize, String, Vec<String>)>,
) -> Result<(), DataGenError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["sample_id".to_string(), key.to_string()];
    header.extend((1..=horizon).map(|t| format!("t{t}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (id, label, cells) in rows {
        let mut rec = vec![id.to_string(), label];
        rec.extend(cells);
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `dataset` into directory `dir`, creating it if needed.
pub fn save_dataset(dataset: &Dataset, system: &PowerSystem, dir: impl AsRef<Path>) -> Result<(), DataGenError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let nt = system.horizon;

    let demands = dataset.samples.iter().flat_map(|s| {
        s.demand
            .iter()
            .enumerate()
            .map(move |(n, row)| (s.id, system.buses[n].id.to_string(), row.iter().map(f64::to_string).collect()))
    });
    write_matrix_rows(&dir.join("demands.csv"), "bus", nt, demands)?;
    for (file, pick) in [("schedules.csv", true), ("startups.csv", false)] {
        let rows = dataset.samples.iter().flat_map(|s| {
            let m = if pick { &s.schedule.u } else { &s.schedule.v };
            m.iter().enumerate().map(move |(g, row)| {
                (s.id, system.generators[g].id.to_string(), row.iter().map(u8::to_string).collect())
            })
        });
        write_matrix_rows(&dir.join(file), "gen", nt, rows)?;
    }

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        system: dataset.system.clone(),
        buses: system.num_buses(),
        generators: system.num_generators(),
        horizon: nt,
        random: dataset.random,
        scuc: dataset.scuc.clone(),
        clock: dataset.clock,
        samples: dataset.samples.len(),
        discarded: dataset.discarded,
        train: dataset.train.clone(),
        test: dataset.test.clone(),
        base_profile: dataset.base_profile.clone(),
        records: dataset
            .samples
            .iter()
            .map(|s| SampleMeta { id: s.id, draw: s.draw, objective: s.objective, solve_time: s.solve_time })
            .collect(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

/// Reads a `sample_id,<key>,t1..tT` table into per-sample matrices ordered
/// like `labels`.
fn read_matrix<T: std::str::FromStr>(
    path: &Path,
    labels: &[String],
    horizon: usize,
    samples: usize,
) -> Result<Vec<Vec<Vec<T>>>, DataGenError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.len() != horizon + 2 {
        return Err(DataGenError::Dimension(format!(
            "{} has {} periods, system horizon is {horizon}",
            path.display(),
            header.len().saturating_sub(2)
        )));
    }
    let slot: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut out: Vec<Vec<Option<Vec<T>>>> = (0..samples).map(|_| (0..labels.len()).map(|_| None).collect()).collect();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let sample: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| DataGenError::Format {
            path: path.display().to_string(),
            msg: format!("unreadable sample id at line {}", rec.position().map_or(0, |p| p.line())),
        })?;
        let corrupt = |msg: String| DataGenError::Corrupt { sample, msg: format!("{}: {msg}", path.display()) };
        if sample >= samples {
            return Err(corrupt("id beyond the manifest's sample count".into()));
        }
        let label = rec.get(1).unwrap_or("");
        let &i = slot.get(label).ok_or_else(|| corrupt(format!("unknown row label `{label}`")))?;
        let values = rec
            .iter()
            .skip(2)
            .map(|c| c.parse::<T>().map_err(|_| corrupt(format!("row `{label}`: bad value `{c}`"))))
            .collect::<Result<Vec<T>, _>>()?;
        if out[sample][i].replace(values).is_some() {
            return Err(corrupt(format!("duplicate row `{label}`")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(sample, rows)| {
            rows.into_iter()
                .enumerate()
                .map(|(i, row)| {
                    row.ok_or_else(|| DataGenError::Corrupt {
                        sample,
                        msg: format!("{}: missing row `{}`", path.display(), labels[i]),
                    })
                })
                .collect()
        })
        .collect()
}

/// Reads a dataset directory written by [`save_dataset`] and checks it
/// against `system`.
pub fn load_dataset(dir: impl AsRef<Path>, system: &PowerSystem) -> Result<Dataset, DataGenError> {
    let dir = dir.as_ref();
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let probe: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| DataGenError::Format { path: path.display().to_string(), msg: e.to_string() })?;
    let found = probe.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(DataGenError::SchemaVersion { found, expected: SCHEMA_VERSION });
    }
    let m: Manifest = serde_json::from_value(probe)
        .map_err(|e| DataGenError::Format { path: path.display().to_string(), msg: e.to_string() })?;
    let dims = (system.num_buses(), system.num_generators(), system.horizon);
    if (m.buses, m.generators, m.horizon) != dims {
        return Err(DataGenError::Dimension(format!(
            "dataset has {} buses, {} generators, {} periods; system has {} buses, {} generators, {} periods",
            m.buses, m.generators, m.horizon, dims.0, dims.1, dims.2
        )));
    }
    if m.records.len() != m.samples || m.records.iter().enumerate().any(|(i, r)| r.id != i) {
        return Err(DataGenError::Format { path: path.display().to_string(), msg: "sample records out of order".into() });
    }
    if m.train.iter().chain(&m.test).any(|&i| i >= m.samples) || m.train.iter().any(|i| m.test.contains(i)) {
        return Err(DataGenError::Format { path: path.display().to_string(), msg: "invalid train/test split".into() });
    }
    let bus_labels: Vec<String> = system.buses.iter().map(|b| b.id.to_string()).collect();
    let gen_labels: Vec<String> = system.generators.iter().map(|g| g.id.to_string()).collect();
    let demands: Vec<Vec<Vec<f64>>> = read_matrix(&dir.join("demands.csv"), &bus_labels, m.horizon, m.samples)?;
    let us: Vec<Vec<Vec<u8>>> = read_matrix(&dir.join("schedules.csv"), &gen_labels, m.horizon, m.samples)?;
    let vs: Vec<Vec<Vec<u8>>> = read_matrix(&dir.join("startups.csv"), &gen_labels, m.horizon, m.samples)?;

    let mut samples = Vec::with_capacity(m.samples);
    for (((rec, demand), u), v) in m.records.into_iter().zip(demands).zip(us).zip(vs) {
        if u.iter().chain(&v).flatten().any(|&x| x > 1) {
            return Err(DataGenError::Corrupt { sample: rec.id, msg: "commitment cell is not 0/1".into() });
        }
        if demand.iter().flatten().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(DataGenError::Corrupt { sample: rec.id, msg: "negative or non-finite demand".into() });
        }
        samples.push(Sample {
            id: rec.id,
            draw: rec.draw,
            demand,
            schedule: CommitmentSchedule { u, v },
            objective: rec.objective,
            solve_time: rec.solve_time,
            feasible: true,
        });
    }
    Ok(Dataset {
        system: m.system,
        random: m.random,
        scuc: m.scuc,
        clock: m.clock,
        base_profile: m.base_profile,
        samples,
        train: m.train,
        test: m.test,
        discarded: m.discarded,
    })
}
