//! Key-value files and CSV tables written by runs.
//!
//! Floats are printed in Rust's shortest round-trip form, so reading a file
//! back reproduces the values bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::driver::ConvergenceRecord;
use crate::error::{Error, Result};
use crate::model::Mesh;
use crate::state::{HarmonicField, PrimitiveState};

pub fn format_kv(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn write_kv(path: &Path, header: &str, pairs: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for line in header.lines() {
        let _ = writeln!(text, "# {line}");
    }
    text.push_str(&format_kv(pairs));
    fs::write(path, text)?;
    Ok(())
}

/// Parses `key = value` lines, ignoring blanks and `#` comments.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: n + 1, message: format!("expected `key = value`, got `{line}`") })?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Parse { line: n + 1, message: format!("duplicate key `{}`", k.trim()) });
        }
    }
    Ok(out)
}

pub fn read_kv(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_kv(&fs::read_to_string(path)?)
}

/// Iteration history without wall-clock columns, so equal runs give equal
/// bytes.
pub fn convergence_csv(history: &[ConvergenceRecord]) -> String {
    let n_h = history.first().map_or(0, |r| r.harmonics.len());
    let mut out = String::from("iteration,mean_residual,r_z");
    for l in 1..=n_h {
        let _ = write!(out, ",harmonic_{l}");
    }
    out.push('\n');
    for r in history {
        let _ = write!(out, "{},{:e},", r.iteration, r.mean);
        if let Some(z) = r.r_z {
            let _ = write!(out, "{z:e}");
        }
        for h in &r.harmonics {
            let _ = write!(out, ",{h:e}");
        }
        out.push('\n');
    }
    out
}

/// `node,x,y,<variables>` for the mean state.
pub fn mean_csv(mesh: &Mesh, mean: &PrimitiveState, names: &[&str]) -> Result<String> {
    check_shape(mesh, mean.block(), mean.n_nodes(), names)?;
    let mut out = format!("node,x,y,{}\n", names.join(","));
    for (i, node) in mean.nodes().enumerate() {
        let [x, y] = mesh.coord(i);
        let _ = write!(out, "{i},{x:e},{y:e}");
        for v in node {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// `node,x,y,<var>_re,<var>_im,...` for one harmonic.
pub fn harmonic_csv(mesh: &Mesh, field: &HarmonicField, names: &[&str]) -> Result<String> {
    check_shape(mesh, field.block(), field.n_nodes(), names)?;
    let mut out = String::from("node,x,y");
    for n in names {
        let _ = write!(out, ",{n}_re,{n}_im");
    }
    out.push('\n');
    for (i, node) in field.nodes().enumerate() {
        let [x, y] = mesh.coord(i);
        let _ = write!(out, "{i},{x:e},{y:e}");
        for z in node {
            let _ = write!(out, ",{:e},{:e}", z.re, z.im);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Reads a table written by [`harmonic_csv`].
pub fn parse_harmonic_csv(text: &str, index: usize, omega: f64) -> Result<HarmonicField> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse { line: 1, message: "empty harmonic table".into() })?;
    let cols = header.split(',').count();
    if cols < 5 || !(cols - 3).is_multiple_of(2) {
        return Err(Error::Parse { line: 1, message: format!("unexpected harmonic header `{header}`") });
    }
    let block = (cols - 3) / 2;
    let mut values = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Parse { line: n + 1, message: format!("expected {cols} columns, got {}", fields.len()) });
        }
        let num = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse { line: n + 1, message: format!("bad number `{s}`: {e}") })
        };
        for k in 0..block {
            values.push(Complex64::new(num(fields[3 + 2 * k])?, num(fields[4 + 2 * k])?));
        }
    }
    HarmonicField::new(index, omega, block, values)
}

fn check_shape(mesh: &Mesh, block: usize, n_nodes: usize, names: &[&str]) -> Result<()> {
    if names.len() != block || n_nodes != mesh.n_nodes() {
        return Err(Error::Shape(format!(
            "{} names and {} nodes for a {}-variable field on {} nodes",
            names.len(),
            n_nodes,
            block,
            mesh.n_nodes()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, CaseConfig};
    use proptest::prelude::*;

    #[test]
    fn kv_round_trip_and_comments() {
        let pairs = vec![("a".to_string(), "1".to_string()), ("b.c".to_string(), "x y".to_string())];
        let parsed = parse_kv(&format!("# head\n\n{}", format_kv(&pairs))).unwrap();
        assert_eq!(parsed["a"], "1");
        assert_eq!(parsed["b.c"], "x y");
    }

    #[test]
    fn kv_rejects_duplicates_and_bare_lines() {
        assert!(matches!(parse_kv("a = 1\na = 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_kv("a = 1\nnonsense\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn convergence_table_layout() {
        let rec = ConvergenceRecord { iteration: 1, mean: 0.5, harmonics: vec![1.0, 2.0], r_z: Some(1.5), seconds: 9.0, work_units: 3.0 };
        let csv = convergence_csv(&[rec]);
        assert_eq!(csv, "iteration,mean_residual,r_z,harmonic_1,harmonic_2\n1,5e-1,1.5e0,1e0,2e0\n");
    }

    proptest! {
        #[test]
        fn harmonic_table_round_trips_bitwise(vals in prop::collection::vec((-1e6f64..1e6, -1e-9f64..1e-9), 24)) {
            let cfg = CaseConfig::nozzle(8, 1);
            let mesh = build_mesh(&cfg).unwrap();
            let values = vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
            let h = HarmonicField::new(1, 3.0, 3, values).unwrap();
            let text = harmonic_csv(&mesh, &h, &["rho", "u", "p"]).unwrap();
            let back = parse_harmonic_csv(&text, 1, 3.0).unwrap();
            prop_assert_eq!(back, h);
        }
    }
}
