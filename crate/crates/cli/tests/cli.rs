use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ucml::grid::{load_profile, load_system};
use ucml::milp::Relation;
use ucml::scuc::{build_scuc, ScucOptions};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ucml(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucml")).current_dir(dir).args(args).output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn pipeline(dir: &Path) {
    let (sys, load) = (data("desk3.toml"), data("desk3_load.csv"));
    let (sys, load) = (sys.to_str().unwrap(), load.to_str().unwrap());
    ok(ucml(dir, &["generate", "--system", sys, "--load", load, "--out", "ds", "--samples", "12", "--seed", "5", "--jobs", "2"]));
    ok(ucml(dir, &["train", "--system", sys, "--dataset", "ds", "--out", "model", "--iterations", "100"]));
    ok(ucml(dir, &["verify", "--system", sys, "--dataset", "ds", "--model", "model/model.json", "--out", "rep", "--jobs", "2"]));
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(fa.contains_key(Path::new("model/predictions.csv")));
    assert!(fa.contains_key(Path::new("rep/reduced-fl_samples.csv")));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(fb[k] == *v, "{} differs", k.display());
    }
}

#[test]
fn missing_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucml(dir.path(), &["generate", "--system", "absent.toml", "--load", "x.csv", "--out", "ds"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));

    let sys = data("desk3.toml");
    let out = ucml(dir.path(), &["verify", "--system", sys.to_str().unwrap(), "--dataset", "nowhere", "--model", "m.json", "--out", "r"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));

    assert_eq!(ucml(dir.path(), &["train", "--unknown"]).status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "samples = 6\nseed = 4\nalpha = 0.1\n").unwrap();
    let (sys, load) = (data("desk3.toml"), data("desk3_load.csv"));
    let args = ["generate", "--system", sys.to_str().unwrap(), "--load", load.to_str().unwrap(), "--config", "run.toml"];
    ok(ucml(dir.path(), &[&args[..], &["--out", "ds", "--samples", "4"]].concat()));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ds/generate_manifest.json")).unwrap()).unwrap();
    let gen = &manifest["config"]["generate"];
    assert_eq!(gen["samples"], 4);
    assert_eq!(gen["random"]["seed"], 4);
    assert_eq!(gen["random"]["alpha"], 0.1);

    std::fs::write(dir.path().join("bad.toml"), "sampels = 6\n").unwrap();
    let out = ucml(dir.path(), &["generate", "--system", sys.to_str().unwrap(), "--load", load.to_str().unwrap(), "--config", "bad.toml", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

struct Mps {
    rows: BTreeMap<String, char>,
    columns: BTreeSet<String>,
    integers: BTreeSet<String>,
    rhs: BTreeMap<String, f64>,
}

/// Reads the sections of a fixed-format MPS file that matter for shape.
fn read_mps(text: &str) -> Mps {
    let mut m = Mps { rows: BTreeMap::new(), columns: BTreeSet::new(), integers: BTreeSet::new(), rhs: BTreeMap::new() };
    let (mut section, mut integer) = ("", false);
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("");
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" if f[0] != "N" => {
                m.rows.insert(f[1].to_string(), f[0].chars().next().unwrap());
            }
            "COLUMNS" if f.get(1) == Some(&"'MARKER'") => integer = f[2] == "'INTORG'",
            "COLUMNS" => {
                m.columns.insert(f[0].to_string());
                if integer {
                    m.integers.insert(f[0].to_string());
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    m.rhs.insert(pair[0].to_string(), pair[1].parse().unwrap());
                }
            }
            "BOUNDS" => {
                m.columns.insert(f[2].to_string());
            }
            _ => {}
        }
    }
    m
}

#[test]
fn exported_mps_has_the_model_shape() {
    let dir = tempfile::tempdir().unwrap();
    for (name, stochastic) in [("desk5", false), ("desk4w", true)] {
        let (sys_path, load_path) = (data(&format!("{name}.toml")), data(&format!("{name}_load.csv")));
        let mut args = vec!["export", "--system", sys_path.to_str().unwrap(), "--load", load_path.to_str().unwrap(), "--out", "m.mps"];
        if stochastic {
            args.push("--stochastic");
        }
        ok(ucml(dir.path(), &args));
        assert!(dir.path().join("m.manifest.json").exists());
        let mps = read_mps(&std::fs::read_to_string(dir.path().join("m.mps")).unwrap());

        let sys = load_system(&sys_path).unwrap();
        let prof = load_profile(&load_path, &sys).unwrap();
        let opts = if stochastic { ScucOptions::stochastic() } else { ScucOptions::default() };
        let (p, _) = build_scuc(&sys, &prof, &opts).unwrap();
        assert_eq!(mps.rows.len(), p.constraints.len());
        assert_eq!(mps.columns.len(), p.num_variables());
        assert_eq!(mps.integers.len(), p.num_binaries());
        for (i, c) in p.constraints.iter().enumerate() {
            let key = ucml::milp::mps::row_name(i);
            let sense = match c.relation {
                Relation::LessEq => 'L',
                Relation::GreaterEq => 'G',
                Relation::Equal => 'E',
            };
            assert_eq!(mps.rows[&key], sense);
            let rhs = mps.rhs.get(&key).copied().unwrap_or(0.0);
            assert!((rhs - c.rhs).abs() <= 1e-9 * c.rhs.abs().max(1.0), "{key}: {rhs} vs {}", c.rhs);
        }
    }
}
