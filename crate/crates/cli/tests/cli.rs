use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fnlh_cli::bench::{run_suite, Suite};
use fnlh_core::io::read_kv;
use tempfile::TempDir;

fn fnlh(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fnlh")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn case(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SCALAR: &str = "case_id = adv\nkind = scalar-advdiff-1d\nnx = 32\n";
const NOZZLE: &str = "case_id = noz\nkind = nozzle-euler\nnx = 32\nharmonics = 1\n";

#[test]
fn implicit_flags_reach_the_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "noz.cfg", NOZZLE);
    let out = fnlh(&["run", &cfg, "--mode=implicit", "--cfl=50", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_kv(&tmp.path().join("r/summary.txt")).unwrap();
    assert_eq!(s["mode"], "implicit");
    assert_eq!(s["cfl"], "50");
    assert_eq!(s["termination"], "target-drop");
    for f in ["manifest.cfg", "convergence.csv", "mean.csv", "harmonic_1.csv"] {
        assert!(tmp.path().join("r").join(f).is_file(), "{f}");
    }
}

#[test]
fn multigrid_flag_engages_the_v_cycle() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "adv.cfg", SCALAR);
    let out = fnlh(&["run", &cfg, "--mode=explicit", "--mg-levels=4", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_kv(&tmp.path().join("r/summary.txt")).unwrap();
    assert_eq!(s["mode"], "explicit");
    assert_eq!(s["mg_levels"], "4");
    assert_eq!(s["v_cycle"], "true");
    assert_eq!(s["coarse_order"], "1");
}

#[test]
fn missing_resolution_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "bad.cfg", "kind = nozzle-euler\n");
    let out = fnlh(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nx"));
}

#[test]
fn malformed_line_reports_its_number() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "bad.cfg", "kind = nozzle-euler\nnx = 16\nnot a pair\n");
    let out = fnlh(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn iteration_cap_has_its_own_exit_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "adv.cfg", SCALAR);
    let out = fnlh(&["run", &cfg, "--max-iters=3", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(read_kv(&tmp.path().join("r/summary.txt")).unwrap()["termination"], "iteration-cap");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(fnlh(&["bench", "no-such-suite"], tmp.path()).status.code(), Some(2));
    assert_eq!(fnlh(&["frobnicate"], tmp.path()).status.code(), Some(2));
}

#[test]
fn rerun_from_manifest_is_bitwise_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "noz.cfg", NOZZLE);
    assert_eq!(fnlh(&["run", &cfg, "--workers=1", "--out", "a"], tmp.path()).status.code(), Some(0));
    let manifest = tmp.path().join("a/manifest.cfg").display().to_string();
    assert_eq!(fnlh(&["run", &manifest, "--out", "b"], tmp.path()).status.code(), Some(0));
    let a = fs::read(tmp.path().join("a/convergence.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/convergence.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(fs::read(tmp.path().join("a/harmonic_1.csv")).unwrap(), fs::read(tmp.path().join("b/harmonic_1.csv")).unwrap());
}

#[test]
fn comparing_a_run_with_itself_passes_with_zero_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "adv.cfg", SCALAR);
    assert_eq!(fnlh(&["run", &cfg, "--out", "r"], tmp.path()).status.code(), Some(0));
    let out = fnlh(&["compare", "r", "r", "--out", "report.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().nth(1).unwrap(), "1,3.141592653589793e0,0e0,2e-2,true");
}

#[test]
fn comparison_refuses_different_cases() {
    let tmp = TempDir::new().unwrap();
    let a = case(tmp.path(), "a.cfg", SCALAR);
    let b = case(tmp.path(), "b.cfg", &SCALAR.replace("case_id = adv", "case_id = other"));
    assert_eq!(fnlh(&["run", &a, "--out", "a"], tmp.path()).status.code(), Some(0));
    assert_eq!(fnlh(&["run", &b, "--out", "b"], tmp.path()).status.code(), Some(0));
    let out = fnlh(&["compare", "a", "b"], tmp.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case ids differ"));
}

#[test]
fn oracle_then_compare_on_the_nozzle() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "noz.cfg", "case_id = noz\nkind = nozzle-euler\nnx = 64\nharmonics = 2\n");
    assert_eq!(fnlh(&["run", &cfg, "--out", "run"], tmp.path()).status.code(), Some(0));
    let out = fnlh(&["oracle", &cfg, "--out", "ref", "--samples", "32"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = fs::read_to_string(tmp.path().join("ref/timeseries.csv")).unwrap();
    assert_eq!(ts.lines().next(), Some("sample,time,node,rho,u,p"));
    assert_eq!(ts.lines().count(), 1 + 32 * 64);
    let out = fnlh(&["compare", "run", "ref"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn oracle_rejects_undersampling() {
    let tmp = TempDir::new().unwrap();
    let cfg = case(tmp.path(), "adv.cfg", SCALAR);
    let out = fnlh(&["oracle", &cfg, "--samples", "3", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn memory_audit_bytes_do_not_depend_on_harmonic_count() {
    let (rows, ok, _) = run_suite(Suite::MemoryAudit).unwrap();
    assert!(ok);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.peak_lhs_bytes == rows[0].peak_lhs_bytes));
}

#[test]
fn convergence_ordering_suite_writes_csv() {
    let tmp = TempDir::new().unwrap();
    let out = fnlh(&["bench", "convergence-ordering", "--out", "bench.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scheme,iterations,wall_seconds,work_units,peak_lhs_bytes,mean_linear_iterations"));
    let schemes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(schemes, ["implicit-cfl50", "explicit-mg4", "explicit-mg1"]);
}
