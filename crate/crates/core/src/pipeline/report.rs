use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Baseline, PipelineConfig, PipelineError, PostProcessed};
use crate::milp::Clock;

/// One test case of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub full_obj: f64,
    pub full_time: f64,
    /// `None` when the reduced model is infeasible.
    pub red_obj: Option<f64>,
    /// Reduced solve plus repair effort.
    pub red_time: f64,
    pub fl_time: f64,
    pub status: String,
    pub fixed: usize,
    pub flexible: usize,
    pub flips: usize,
    pub full_binaries: usize,
    pub reduced_binaries: usize,
}

impl SampleRecord {
    pub(crate) fn infeasible(id: usize, base: &Baseline, post: &PostProcessed, time: f64, free: usize) -> Self {
        Self {
            sample_id: id,
            full_obj: base.objective,
            full_time: base.time,
            red_obj: None,
            red_time: time + post.fl_time,
            fl_time: post.fl_time,
            status: "infeasible".into(),
            fixed: post.plan.fixed_count(),
            flexible: post.plan.flexible_count(),
            flips: post.flips,
            full_binaries: base.free_binaries,
            reduced_binaries: free,
        }
    }

    pub fn feasible(&self) -> bool {
        self.red_obj.is_some()
    }
}

/// Base-normalized aggregates of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub samples: usize,
    pub infeasible: usize,
    /// Mean reduced/full objective over feasible samples.
    pub bn_cost: Option<f64>,
    /// Mean reduced/full time over all samples.
    pub bn_time: Option<f64>,
    /// `1 / bn_time`.
    pub speedup: Option<f64>,
    pub median_full_time: Option<f64>,
    pub median_reduced_time: Option<f64>,
    pub mean_fixed_fraction: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) })
}

impl Summary {
    pub fn from_records(records: &[SampleRecord]) -> Self {
        let ratio = |a: f64, b: f64| if b == 0.0 { 1.0 } else { a / b };
        let bn_cost = mean(records.iter().filter_map(|r| r.red_obj.map(|o| ratio(o, r.full_obj))));
        let bn_time = mean(records.iter().map(|r| ratio(r.red_time, r.full_time)));
        Self {
            samples: records.len(),
            infeasible: records.iter().filter(|r| !r.feasible()).count(),
            bn_cost,
            bn_time,
            speedup: bn_time.filter(|&t| t > 0.0).map(|t| 1.0 / t),
            median_full_time: median(records.iter().map(|r| r.full_time).collect()),
            median_reduced_time: median(records.iter().map(|r| r.red_time).collect()),
            mean_fixed_fraction: mean(records.iter().map(|r| r.fixed as f64 / (r.fixed + r.flexible).max(1) as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub variant: String,
    pub config: PipelineConfig,
    pub clock: Clock,
    pub records: Vec<SampleRecord>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn new(variant: &str, config: PipelineConfig, clock: Clock, mut records: Vec<SampleRecord>) -> Self {
        records.sort_by_key(|r| r.sample_id);
        let summary = Summary::from_records(&records);
        Self { variant: variant.to_string(), config, clock, records, summary }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io { path: path.display().to_string(), msg: e.to_string() }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Writes `<variant>_samples.csv` per report, `summary.json`, and the bar
/// data `cost_bars.csv` / `time_bars.csv` into `dir`.
pub fn write_reports(reports: &[ExperimentReport], dir: impl AsRef<Path>) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for r in reports {
        let path = dir.join(format!("{}_samples.csv", r.variant));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(["sample_id", "full_obj", "full_time", "red_obj", "red_time", "fl_time", "status"])
            .map_err(|e| io(&path, e))?;
        for s in &r.records {
            w.write_record([
                s.sample_id.to_string(),
                s.full_obj.to_string(),
                s.full_time.to_string(),
                opt(s.red_obj),
                s.red_time.to_string(),
                s.fl_time.to_string(),
                s.status.clone(),
            ])
            .map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))?;
    }
    let path = dir.join("summary.json");
    let summary: Vec<_> = reports
        .iter()
        .map(|r| serde_json::json!({ "variant": r.variant, "config": r.config, "clock": r.clock, "summary": r.summary }))
        .collect();
    let text = serde_json::to_string_pretty(&summary).map_err(|e| io(&path, e))?;
    std::fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;

    for (file, header, row) in [
        ("cost_bars.csv", ["variant", "bn_cost", "infeasible"], cost_row as fn(&ExperimentReport) -> [String; 3]),
        ("time_bars.csv", ["variant", "bn_time", "speedup"], time_row),
    ] {
        let path = dir.join(file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(header).map_err(|e| io(&path, e))?;
        for r in reports {
            w.write_record(row(r)).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))?;
    }
    Ok(())
}

fn cost_row(r: &ExperimentReport) -> [String; 3] {
    [r.variant.clone(), opt(r.summary.bn_cost), r.summary.infeasible.to_string()]
}

fn time_row(r: &ExperimentReport) -> [String; 3] {
    [r.variant.clone(), opt(r.summary.bn_time), opt(r.summary.speedup)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, full: f64, red: Option<f64>, ft: f64, rt: f64) -> SampleRecord {
        SampleRecord {
            sample_id: id,
            full_obj: full,
            full_time: ft,
            red_obj: red,
            red_time: rt,
            fl_time: 0.0,
            status: if red.is_some() { "optimal" } else { "infeasible" }.into(),
            fixed: 3,
            flexible: 1,
            flips: 0,
            full_binaries: 8,
            reduced_binaries: 2,
        }
    }

    #[test]
    fn summary_arithmetic() {
        let s = Summary::from_records(&[rec(0, 100.0, Some(101.0), 10.0, 5.0), rec(1, 200.0, None, 10.0, 2.5)]);
        assert_eq!(s.infeasible, 1);
        assert!((s.bn_cost.unwrap() - 1.01).abs() < 1e-12);
        assert!((s.bn_time.unwrap() - 0.375).abs() < 1e-12);
        assert!((s.speedup.unwrap() * s.bn_time.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.median_full_time, Some(10.0));
        assert_eq!(Summary::from_records(&[]).bn_cost, None);
    }
}
