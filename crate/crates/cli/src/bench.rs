//! Benchmark suites. Each writes one table with the columns
//! `scheme,iterations,wall_seconds,work_units,peak_lhs_bytes,mean_linear_iterations`
//! and checks its own contract.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use fnlh_core::driver::{Solver, Termination};
use fnlh_core::model::{CaseConfig, Mode};
use fnlh_core::Error;

use crate::{EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    ConvergenceOrdering,
    PartitionSweep,
    MemoryAudit,
    WuReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scheme: String,
    pub iterations: usize,
    pub reached_target: bool,
    pub wall_seconds: f64,
    pub work_units: f64,
    pub peak_lhs_bytes: usize,
    pub mean_linear_iterations: f64,
}

pub fn measure(scheme: &str, cfg: CaseConfig) -> Result<BenchRow, Error> {
    let mut solver = Solver::new(cfg)?;
    let out = solver.run();
    let last = out.history.last();
    Ok(BenchRow {
        scheme: scheme.to_string(),
        iterations: out.iterations(),
        reached_target: out.termination == Termination::TargetDrop,
        wall_seconds: last.map_or(0.0, |r| r.seconds),
        work_units: last.map_or(0.0, |r| r.work_units),
        peak_lhs_bytes: solver.allocation_counter().peak(),
        mean_linear_iterations: out.linear.mean_iterations(),
    })
}

pub fn table(rows: &[BenchRow]) -> String {
    let mut s = String::from("scheme,iterations,wall_seconds,work_units,peak_lhs_bytes,mean_linear_iterations\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{},{:.6}",
            r.scheme, r.iterations, r.wall_seconds, r.work_units, r.peak_lhs_bytes, r.mean_linear_iterations
        );
    }
    s
}

fn nozzle(mode: Mode, cfl: f64, levels: usize) -> CaseConfig {
    let mut cfg = CaseConfig::nozzle(64, 2);
    cfg.scheme.mode = mode;
    cfg.scheme.cfl = cfl;
    cfg.scheme.mg_levels = levels;
    cfg
}

fn non_decreasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// Rows of a suite and whether its contract holds, with a one-line verdict.
pub fn run_suite(suite: Suite) -> Result<(Vec<BenchRow>, bool, String), Error> {
    match suite {
        Suite::ConvergenceOrdering => {
            let rows = vec![
                measure("implicit-cfl50", nozzle(Mode::Implicit, 50.0, 1))?,
                measure("explicit-mg4", nozzle(Mode::Explicit, 2.0, 4))?,
                measure("explicit-mg1", nozzle(Mode::Explicit, 2.0, 1))?,
            ];
            let it: Vec<usize> = rows.iter().map(|r| r.iterations).collect();
            let ok = rows.iter().all(|r| r.reached_target) && it[0] < it[1] && it[1] < it[2];
            Ok((rows, ok, format!("iterations implicit < explicit-mg4 < explicit-mg1: {it:?}")))
        }
        Suite::PartitionSweep => {
            let mut rows = Vec::new();
            for p in [1, 2, 4, 8] {
                let mut cfg = CaseConfig::scalar(64, 32, 1);
                cfg.scheme.partitions = p;
                cfg.scheme.workers = p;
                rows.push(measure(&format!("implicit-p{p}"), cfg)?);
            }
            let lin: Vec<f64> = rows.iter().map(|r| r.mean_linear_iterations).collect();
            let wu: Vec<f64> = rows.iter().map(|r| r.work_units).collect();
            let ok = non_decreasing(&lin) && non_decreasing(&wu);
            Ok((rows, ok, format!("non-decreasing in P: linear iterations {lin:.3?}, WU {wu:.3?}")))
        }
        Suite::MemoryAudit => {
            let mut rows = Vec::new();
            for n_h in [1, 2, 4, 8] {
                let mut cfg = CaseConfig::nozzle(64, n_h);
                cfg.scheme.max_iters = 400;
                rows.push(measure(&format!("implicit-nh{n_h}"), cfg)?);
            }
            let bytes: Vec<usize> = rows.iter().map(|r| r.peak_lhs_bytes).collect();
            let ok = bytes.windows(2).all(|w| w[0] == w[1]);
            Ok((rows, ok, format!("LHS bytes identical for N_h = 1, 2, 4, 8: {bytes:?}")))
        }
        Suite::WuReport => {
            let rows = vec![
                measure("implicit-cfl10", nozzle(Mode::Implicit, 10.0, 1))?,
                measure("implicit-cfl50", nozzle(Mode::Implicit, 50.0, 1))?,
                measure("implicit-cfl100", nozzle(Mode::Implicit, 100.0, 1))?,
                measure("explicit-mg1", nozzle(Mode::Explicit, 2.0, 1))?,
                measure("explicit-mg2", nozzle(Mode::Explicit, 2.0, 2))?,
                measure("explicit-mg4", nozzle(Mode::Explicit, 2.0, 4))?,
            ];
            let base = rows[1].work_units;
            let ratios: Vec<String> = rows.iter().map(|r| format!("{}={:.2}", r.scheme, r.work_units / base)).collect();
            let ok = rows.iter().all(|r| r.reached_target);
            Ok((rows, ok, format!("WU relative to implicit-cfl50: {}", ratios.join(" "))))
        }
    }
}

pub fn cmd_bench(suite: Suite, out: Option<&Path>) -> Result<i32, Error> {
    let (rows, ok, verdict) = run_suite(suite)?;
    let csv = table(&rows);
    match out {
        Some(p) => fs::write(p, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!("{}: {verdict}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}
