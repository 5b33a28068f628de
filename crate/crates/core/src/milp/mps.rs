//! Fixed-format MPS export.
//!
//! Names are replaced by eight-character identifiers (`C0000001`, `R0000001`)
//! so that every field fits its fixed column window; numbers are written in
//! the shortest representation that fits twelve characters. Binaries are
//! wrapped in `MARKER INTORG/INTEND` blocks and given explicit bounds.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{MilpError, MilpProblem, Relation, VarKind};
use crate::Scalar;

const OBJ_ROW: &str = "COST";

pub fn column_name(j: usize) -> String {
    format!("C{:07}", j + 1)
}

pub fn row_name(i: usize) -> String {
    format!("R{:07}", i + 1)
}

/// Formats `v` in at most twelve characters, keeping as many significant
/// digits as fit.
pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let fixed = (0..=11).rev().map(|d| format!("{v:.d$}")).find(|s| s.len() <= 12);
    let sci = (0..=11).rev().map(|d| format!("{v:.d$e}")).find(|s| s.len() <= 12);
    let error = |s: &String| (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
    [fixed, sci]
        .into_iter()
        .flatten()
        .min_by(|a, b| error(a).total_cmp(&error(b)))
        .unwrap_or_else(|| format!("{v:.0e}"))
}

fn field_line(out: &mut String, code: &str, name: &str, entries: &[(&str, f64)]) {
    // Columns: 2-3 code, 5-12 name, 15-22 / 25-36, 40-47 / 50-61.
    let mut line = format!(" {code:<2} {name:<8}");
    for (k, (label, value)) in entries.iter().enumerate() {
        if k == 0 {
            let _ = write!(line, "  {label:<8}  {:>12}", format_number(*value));
        } else {
            let _ = write!(line, "   {label:<8}  {:>12}", format_number(*value));
        }
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Renders `problem` as fixed-format MPS text.
pub fn to_mps_string<T: Scalar>(problem: &MilpProblem<T>) -> Result<String, MilpError> {
    problem.validate()?;
    let n = problem.num_variables();
    let mut out = String::new();
    let name: String = problem.name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "NAME          {}", if name.is_empty() { "PROBLEM" } else { &name });
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (i, c) in problem.constraints.iter().enumerate() {
        let code = match c.relation {
            Relation::LessEq => "L",
            Relation::Equal => "E",
            Relation::GreaterEq => "G",
        };
        let _ = writeln!(out, " {code}  {}", row_name(i));
    }

    // Column-major coefficient lists with duplicates merged.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in problem.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            match columns[j].iter_mut().find(|(r, _)| *r == i + 1) {
                Some(e) => e.1 += a.as_f64(),
                None => columns[j].push((i + 1, a.as_f64())),
            }
        }
    }
    let cost = problem.objective_dense();
    for (j, col) in columns.iter_mut().enumerate() {
        col.retain(|&(_, a)| a != 0.0);
        let c = cost[j].as_f64();
        if c != 0.0 {
            col.insert(0, (0, c));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0usize;
    for (j, col) in columns.iter().enumerate() {
        let is_int = problem.variables[j].kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{markers:07}  'MARKER'                 {tag}");
            markers += 1;
            in_int = is_int;
        }
        let cname = column_name(j);
        let names: Vec<String> =
            col.iter().map(|&(r, _)| if r == 0 { OBJ_ROW.to_string() } else { row_name(r - 1) }).collect();
        if col.is_empty() {
            // Keep the column declared so readers see every variable.
            field_line(&mut out, "", &cname, &[(OBJ_ROW, 0.0)]);
        }
        for (pair, labels) in col.chunks(2).zip(names.chunks(2)) {
            let entries: Vec<(&str, f64)> =
                pair.iter().zip(labels).map(|(&(_, a), l)| (l.as_str(), a)).collect();
            field_line(&mut out, "", &cname, &entries);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{markers:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    let mut rhs: Vec<(String, f64)> = Vec::new();
    let constant = problem.objective_constant.as_f64();
    if constant != 0.0 {
        rhs.push((OBJ_ROW.to_string(), -constant));
    }
    for (i, c) in problem.constraints.iter().enumerate() {
        let v = c.rhs.as_f64();
        if v != 0.0 {
            rhs.push((row_name(i), v));
        }
    }
    for pair in rhs.chunks(2) {
        let entries: Vec<(&str, f64)> = pair.iter().map(|(l, v)| (l.as_str(), *v)).collect();
        field_line(&mut out, "", "RHS", &entries);
    }

    out.push_str("BOUNDS\n");
    for (j, v) in problem.variables.iter().enumerate() {
        let cname = column_name(j);
        let (lo, hi) = (v.lower.as_f64(), v.upper.as_f64());
        let mut emit = |code: &str, value: Option<f64>| {
            let mut line = format!(" {code:<2} BND       {cname:<8}");
            if let Some(x) = value {
                let _ = write!(line, "  {:>12}", format_number(x));
            }
            out.push_str(&line);
            out.push('\n');
        };
        if lo == hi {
            emit("FX", Some(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => emit("FR", None),
            (false, true) => {
                emit("MI", None);
                emit("UP", Some(hi));
            }
            (true, false) => {
                if lo != 0.0 {
                    emit("LO", Some(lo));
                }
            }
            (true, true) => {
                if lo != 0.0 {
                    emit("LO", Some(lo));
                }
                emit("UP", Some(hi));
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_mps<T: Scalar>(problem: &MilpProblem<T>, path: impl AsRef<Path>) -> Result<(), MilpError> {
    let text = to_mps_string(problem)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_fit_twelve_columns() {
        for v in [0.0, 1.0, -2.5, 1.0 / 3.0, -123456.789012345, 1e-17, 6.02e23, -1.0 / 7.0] {
            let s = format_number(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-7 * v.abs().max(1e-300), "{v} -> {s}");
        }
    }

    #[test]
    fn sections_present() {
        let mut p = MilpProblem::<f64>::new("two var");
        let x = p.add_continuous("x", 0.0, f64::INFINITY);
        let u = p.add_binary("u");
        p.add_constraint("c", vec![(x, 1.0), (u, -4.0)], Relation::LessEq, 0.0);
        p.add_objective_term(x, -1.0);
        let s = to_mps_string(&p).unwrap();
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(s.lines().any(|l| l.starts_with(section)), "missing {section}");
        }
        assert!(s.contains("'INTORG'"));
        assert!(s.contains(" UP BND       C0000002             1"));
    }
}
