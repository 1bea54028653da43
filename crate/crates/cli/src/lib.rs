//! Command-line front end: runs, oracle runs, comparisons and benchmark
//! suites, each writing plain-text artifacts into an output directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fnlh_core::driver::{Solver, Termination};
use fnlh_core::io;
use fnlh_core::model::{build_mesh, CaseConfig, Mesh};
use fnlh_core::oracle::{compare_amplitudes, extract_harmonics, unsteady_run, OracleSettings, MAX_PERIODS};
use fnlh_core::residual::Physics;
use fnlh_core::state::HarmonicField;
use fnlh_core::Error;

pub mod bench;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;

pub const MANIFEST: &str = "manifest.cfg";
pub const SUMMARY: &str = "summary.txt";
pub const CONVERGENCE: &str = "convergence.csv";
pub const MEAN_FIELD: &str = "mean.csv";
pub const TIME_SERIES: &str = "timeseries.csv";
pub const COMPARISON: &str = "compare.csv";

pub fn harmonic_file(index: usize) -> String {
    format!("harmonic_{index}.csv")
}

#[derive(Debug, Parser)]
#[command(name = "fnlh", version, about = "Non-linear harmonic flow solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Converge a case and write its artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Time-accurate reference run with harmonic extraction.
    Oracle {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Largest number of periods before giving up on periodicity.
        #[arg(long, default_value_t = MAX_PERIODS)]
        periods: usize,
        /// Samples over the final period.
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Per-harmonic amplitude errors between a run and a reference run.
    Compare {
        run_dir: PathBuf,
        reference_dir: PathBuf,
        /// Largest acceptable relative L2 error per harmonic.
        #[arg(long, default_value_t = 0.02)]
        bound: f64,
        /// Report path; defaults to compare.csv in the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Benchmark suite producing one CSV table.
    Bench {
        suite: bench::Suite,
        /// CSV path; the table goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub mg_levels: Option<usize>,
    #[arg(long)]
    pub harmonics: Option<usize>,
    #[arg(long)]
    pub partitions: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub target_drop: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Output directory; defaults to the config's `output_dir` or
    /// `fnlh-out/<case_id>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` config override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl RunFlags {
    pub fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut kv = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.push((k.to_string(), v));
            }
        };
        put("mode", self.mode.clone());
        put("cfl", self.cfl.map(|v| v.to_string()));
        put("eps", self.eps.map(|v| v.to_string()));
        put("mg_levels", self.mg_levels.map(|v| v.to_string()));
        put("harmonics", self.harmonics.map(|v| v.to_string()));
        put("partitions", self.partitions.map(|v| v.to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        put("target_drop", self.target_drop.map(|v| v.to_string()));
        put("max_iters", self.max_iters.map(|v| v.to_string()));
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(kv)
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonPeriodic { .. } => EXIT_CAP,
                Error::Divergence { .. } | Error::LinearDivergence { .. } | Error::State { .. } => EXIT_DIVERGENCE,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn execute(command: Command) -> Result<i32, Error> {
    match command {
        Command::Run { config, flags } => cmd_run(&config, &flags),
        Command::Oracle { config, flags, periods, samples } => cmd_oracle(&config, &flags, periods, samples),
        Command::Compare { run_dir, reference_dir, bound, out } => cmd_compare(&run_dir, &reference_dir, bound, out.as_deref()),
        Command::Bench { suite, out } => bench::cmd_bench(suite, out.as_deref()),
    }
}

/// Loads a case with overrides and picks the output directory.
pub fn load_case(path: &Path, flags: &RunFlags) -> Result<(CaseConfig, PathBuf), Error> {
    let path = fs::canonicalize(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let overrides = flags.overrides()?;
    let cfg = CaseConfig::from_file_with_overrides(&path, &overrides)?;
    let from_file = io::parse_kv(&fs::read_to_string(&path)?)?.get("output_dir").map(PathBuf::from);
    let from_overrides = overrides.iter().rev().find(|(k, _)| k == "output_dir").map(|(_, v)| PathBuf::from(v));
    let out = flags
        .out
        .clone()
        .or(from_overrides)
        .or(from_file)
        .unwrap_or_else(|| PathBuf::from("fnlh-out").join(&cfg.case_id));
    Ok((cfg, out))
}

fn write_manifest(dir: &Path, cfg: &CaseConfig, header: &str) -> Result<(), Error> {
    let mut kv = cfg.materialized();
    kv.push(("output_dir".into(), dir.display().to_string()));
    io::write_kv(&dir.join(MANIFEST), header, &kv)
}

fn write_fields(dir: &Path, physics: &Physics, mesh: &Mesh, mean: &fnlh_core::state::PrimitiveState, harmonics: &[HarmonicField]) -> Result<(), Error> {
    let names = physics.variable_names();
    fs::write(dir.join(MEAN_FIELD), io::mean_csv(mesh, mean, names)?)?;
    for h in harmonics {
        fs::write(dir.join(harmonic_file(h.index)), io::harmonic_csv(mesh, h, names)?)?;
    }
    Ok(())
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn cmd_run(config: &Path, flags: &RunFlags) -> Result<i32, Error> {
    let (mut cfg, dir) = load_case(config, flags)?;
    fs::create_dir_all(&dir)?;
    let mut solver = Solver::new(cfg.clone())?;
    let outcome = solver.run();
    cfg.scheme.reference_time = Some(outcome.reference_time);
    write_manifest(&dir, &cfg, "fnlh run manifest")?;
    fs::write(dir.join(CONVERGENCE), io::convergence_csv(&outcome.history))?;
    write_fields(&dir, solver.physics(), solver.mesh(), &outcome.mean, &outcome.harmonics)?;

    let s = &cfg.scheme;
    let first = outcome.history.first();
    let last = outcome.history.last();
    let drop = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => format!("{:.4}", (a / b).log10()),
        _ => "n/a".into(),
    };
    let mut summary = vec![
        kv("case_id", &cfg.case_id),
        kv("kind", cfg.kind),
        kv("mode", s.mode),
        kv("cfl", s.cfl),
        kv("eps", s.eps),
        kv("mg_levels", s.mg_levels),
        kv("v_cycle", s.mg_levels > 1),
        kv("coarse_order", if s.mg_levels > 1 { "1" } else { "n/a" }),
        kv("linear_tol", s.linear_tol),
        kv("linear_max_iter", s.linear_max_iter),
        kv("partitions", s.partitions),
        kv("workers", s.workers),
        kv("harmonics", cfg.n_harmonics()),
        kv("termination", outcome.termination.as_str()),
        kv("iterations", outcome.iterations()),
        kv("mean_drop_orders", drop(first.map(|r| r.mean), last.map(|r| r.mean))),
        kv("rz_drop_orders", drop(first.and_then(|r| r.r_z), last.and_then(|r| r.r_z))),
        kv("wall_seconds", last.map_or(0.0, |r| r.seconds)),
        kv("work_units", last.map_or(0.0, |r| r.work_units)),
        kv("reference_time", outcome.reference_time),
        kv("lhs_bytes", outcome.lhs_bytes),
        kv("peak_lhs_bytes", solver.allocation_counter().peak()),
        kv("linear_solves", outcome.linear.solves),
        kv("linear_mean_iterations", outcome.linear.mean_iterations()),
        kv("linear_capped", outcome.linear.capped),
        kv("linear_violations", outcome.linear.violations),
        kv("output_dir", dir.display()),
    ];
    if let Some(m) = &outcome.message {
        summary.push(kv("message", m));
    }
    io::write_kv(&dir.join(SUMMARY), "fnlh run summary", &summary)?;
    print!("{}", io::format_kv(&summary));
    Ok(match outcome.termination {
        Termination::TargetDrop => EXIT_OK,
        Termination::IterationCap => EXIT_CAP,
        Termination::Divergence => EXIT_DIVERGENCE,
    })
}

pub fn cmd_oracle(config: &Path, flags: &RunFlags, periods: usize, samples: usize) -> Result<i32, Error> {
    let (cfg, dir) = load_case(config, flags)?;
    fs::create_dir_all(&dir)?;
    let physics = Physics::from_config(&cfg);
    let mesh = build_mesh(&cfg)?;
    let run = unsteady_run(&cfg, &OracleSettings::new(periods, samples))?;
    let (mean, harmonics) = extract_harmonics(&run.series, &cfg.harmonics)?;
    write_manifest(&dir, &cfg, "fnlh oracle manifest")?;
    let mut ts = Vec::new();
    run.series.write_csv(&mut ts, physics.variable_names())?;
    fs::write(dir.join(TIME_SERIES), ts)?;
    write_fields(&dir, &physics, &mesh, &mean, &harmonics)?;
    let summary = vec![
        kv("case_id", &cfg.case_id),
        kv("kind", cfg.kind),
        kv("solver", "oracle"),
        kv("harmonics", cfg.n_harmonics()),
        kv("periods", run.periods),
        kv("steps_per_period", run.steps_per_period),
        kv("time_step", run.time_step),
        kv("samples", run.series.sample_count()),
        kv("last_periodic_change", run.last_change),
        kv("output_dir", dir.display()),
    ];
    io::write_kv(&dir.join(SUMMARY), "fnlh oracle summary", &summary)?;
    print!("{}", io::format_kv(&summary));
    Ok(EXIT_OK)
}

fn read_harmonics(dir: &Path, cfg: &CaseConfig) -> Result<Vec<HarmonicField>, Error> {
    cfg.harmonics
        .entries()
        .iter()
        .map(|e| {
            let path = dir.join(harmonic_file(e.index));
            let text = fs::read_to_string(&path).map_err(|err| Error::Config(format!("cannot read {}: {err}", path.display())))?;
            io::parse_harmonic_csv(&text, e.index, e.omega)
        })
        .collect()
}

fn read_manifest(dir: &Path) -> Result<CaseConfig, Error> {
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Err(Error::Config(format!("{} has no {MANIFEST}", dir.display())));
    }
    CaseConfig::from_file(&path)
}

pub fn cmd_compare(run_dir: &Path, reference_dir: &Path, bound: f64, out: Option<&Path>) -> Result<i32, Error> {
    let a = read_manifest(run_dir)?;
    let b = read_manifest(reference_dir)?;
    if a.case_id != b.case_id {
        return Err(Error::Comparison(format!("case ids differ: `{}` versus `{}`", a.case_id, b.case_id)));
    }
    if (a.kind, a.nx, a.ny) != (b.kind, b.nx, b.ny) {
        return Err(Error::Comparison(format!(
            "meshes differ: {} {}x{} versus {} {}x{}",
            a.kind, a.nx, a.ny, b.kind, b.nx, b.ny
        )));
    }
    if a.harmonics.omegas() != b.harmonics.omegas() {
        return Err(Error::Config("harmonic sets differ between the two runs".into()));
    }
    let mesh = build_mesh(&a)?;
    let report = compare_amplitudes(&mesh, &read_harmonics(run_dir, &a)?, &read_harmonics(reference_dir, &b)?)?;
    let mut csv = String::from("harmonic,omega,relative_l2,bound,pass\n");
    let mut all = true;
    for e in &report.errors {
        let pass = e.relative_l2 <= bound;
        all &= pass;
        csv.push_str(&format!("{},{:e},{:e},{:e},{}\n", e.index, e.omega, e.relative_l2, bound, pass));
    }
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| run_dir.join(COMPARISON));
    fs::write(&path, &csv)?;
    print!("{csv}");
    println!("{}", if all { "PASS" } else { "FAIL" });
    Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_become_config_keys() {
        let flags = RunFlags {
            mode: Some("explicit".into()),
            mg_levels: Some(4),
            cfl: Some(1.5),
            set: vec!["k4 = 0.05".into()],
            ..RunFlags::default()
        };
        let kv = flags.overrides().unwrap();
        let get = |k: &str| kv.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str());
        assert_eq!(get("mode"), Some("explicit"));
        assert_eq!(get("mg_levels"), Some("4"));
        assert_eq!(get("cfl"), Some("1.5"));
        assert_eq!(get("k4"), Some("0.05"));
        assert_eq!(get("eps"), None);
    }

    #[test]
    fn set_without_equals_is_a_config_error() {
        let flags = RunFlags { set: vec!["k4".into()], ..RunFlags::default() };
        assert!(matches!(flags.overrides(), Err(Error::Config(_))));
    }

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(main_with(["fnlh", "--help"]), EXIT_OK);
        assert_eq!(main_with(["fnlh", "run"]), EXIT_USAGE);
    }
}
