use fnlh_core::driver::{run_to_convergence, Termination};
use fnlh_core::model::{build_mesh, CaseConfig, Mode};
use fnlh_core::oracle::{compare_amplitudes, extract_harmonics, unsteady_solve};
use num_complex::Complex64;

fn scalar_1d(mode: Mode, levels: usize) -> CaseConfig {
    let mut cfg = CaseConfig::scalar(64, 1, 1);
    cfg.scheme.mode = mode;
    cfg.scheme.cfl = mode.default_cfl();
    cfg.scheme.mg_levels = levels;
    cfg
}

#[test]
fn multigrid_needs_fewer_iterations_on_scalar_case() {
    let one = run_to_convergence(&scalar_1d(Mode::Explicit, 1)).unwrap();
    let four = run_to_convergence(&scalar_1d(Mode::Explicit, 4)).unwrap();
    assert_eq!(one.termination, Termination::TargetDrop);
    assert_eq!(four.termination, Termination::TargetDrop);
    assert!(four.iterations() < one.iterations(), "{} vs {}", four.iterations(), one.iterations());
}

#[test]
fn converged_harmonics_do_not_depend_on_the_scheme() {
    let cfg = scalar_1d(Mode::Implicit, 1);
    let mesh = build_mesh(&cfg).unwrap();
    let implicit = run_to_convergence(&cfg).unwrap();
    let explicit = run_to_convergence(&scalar_1d(Mode::Explicit, 4)).unwrap();
    let e = compare_amplitudes(&mesh, &implicit.harmonics, &explicit.harmonics).unwrap();
    assert!(e.error(1).unwrap() < 1e-6, "{:?}", e);
}

#[test]
fn worker_count_does_not_change_the_result() {
    let mut cfg = CaseConfig::nozzle(32, 2);
    cfg.scheme.max_iters = 30;
    let one = run_to_convergence(&cfg).unwrap();
    cfg.scheme.workers = 2;
    let two = run_to_convergence(&cfg).unwrap();
    assert_eq!(one.mean, two.mean);
    assert_eq!(one.harmonics, two.harmonics);
    let residuals = |o: &fnlh_core::driver::SolveOutcome| o.history.iter().map(|r| (r.mean, r.r_z)).collect::<Vec<_>>();
    assert_eq!(residuals(&one), residuals(&two));
}

#[test]
fn linear_scalar_case_matches_time_accurate_reference() {
    let cfg = CaseConfig::scalar(48, 1, 1);
    let mesh = build_mesh(&cfg).unwrap();
    let fnlh = run_to_convergence(&cfg).unwrap();
    let ts = unsteady_solve(&cfg, 200, 16).unwrap();
    let (mean, oracle) = extract_harmonics(&ts, &cfg.harmonics).unwrap();
    let e = compare_amplitudes(&mesh, &fnlh.harmonics, &oracle).unwrap().error(1).unwrap();
    assert!(e < 1e-5, "{e}");
    assert!(mean.values().iter().all(|v| (v - cfg.scalar.inlet_value).abs() < 1e-6));
}

#[test]
fn unforced_harmonics_stay_zero() {
    let mut cfg = CaseConfig::nozzle(32, 2);
    cfg.forcing_amplitude = 0.0;
    cfg.scheme.max_iters = 200;
    let out = run_to_convergence(&cfg).unwrap();
    for h in &out.harmonics {
        assert!(h.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn harmonic_amplitude_is_linear_in_forcing_for_small_amplitudes() {
    let run = |amp: f64| {
        let mut cfg = CaseConfig::nozzle(32, 1);
        cfg.forcing_amplitude = amp;
        run_to_convergence(&cfg).unwrap().harmonics.remove(0)
    };
    let (a, b) = (run(1e-4), run(2e-4));
    let mesh = build_mesh(&CaseConfig::nozzle(32, 1)).unwrap();
    let doubled = fnlh_core::state::HarmonicField::new(1, a.omega, 3, a.values().iter().map(|z| 2.0 * z).collect()).unwrap();
    let e = compare_amplitudes(&mesh, &[doubled], &[b]).unwrap().error(1).unwrap();
    assert!(e < 1e-3, "{e}");
}
