//! Time-accurate reference solutions of the model problems and Fourier
//! extraction of their harmonic content.
//!
//! The unsteady solver integrates the same second-order residual the harmonic
//! solver uses, with classical four-stage Runge-Kutta at a global time step.
//! Boundary states are held at the characteristic boundary conditions
//! linearized about a converged steady state, driven by the same forcing
//! signal the harmonic solver sees.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::driver::Solver;
use crate::error::{Error, Result};
use crate::model::{build_mesh, CaseConfig, HarmonicSpec, Mesh, Mode};
use crate::residual::{real_signal, Order, Physics};
use crate::state::{conservative_node, primitive_node, HarmonicField, PrimitiveState};

pub const MAX_PERIODS: usize = 200;
pub const PERIODIC_TOL: f64 = 1e-9;
/// Step size as a fraction of the inverse summed face wave speeds.
pub const DEFAULT_CFL: f64 = 1.0;
/// Boundary-adjacent layers left out of amplitude comparisons.
pub const EXCLUDED_LAYERS: usize = 2;

/// Samples of the primitive state over one period, taken at
/// `start_time + q * period / samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub block: usize,
    pub n_nodes: usize,
    pub period: f64,
    pub start_time: f64,
    pub samples: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(block: usize, n_nodes: usize, period: f64, start_time: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Config(format!("period must be positive, got {period}")));
        }
        if samples.is_empty() || samples.iter().any(|s| s.len() != block * n_nodes) {
            return Err(Error::Shape(format!("every sample needs {} values", block * n_nodes)));
        }
        Ok(Self { block, n_nodes, period, start_time, samples })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn time(&self, q: usize) -> f64 {
        self.start_time + self.period * q as f64 / self.samples.len() as f64
    }

    /// Largest deviation of any sample from the first.
    pub fn spread(&self) -> f64 {
        let first = &self.samples[0];
        self.samples
            .iter()
            .flat_map(|s| s.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// One row per sample and node: `sample,time,node,<variables...>`.
    pub fn write_csv<W: Write>(&self, mut out: W, names: &[&str]) -> Result<()> {
        if names.len() != self.block {
            return Err(Error::Shape(format!("{} column names for {} variables", names.len(), self.block)));
        }
        writeln!(out, "sample,time,node,{}", names.join(","))?;
        for (q, s) in self.samples.iter().enumerate() {
            let t = self.time(q);
            for (i, node) in s.chunks(self.block).enumerate() {
                write!(out, "{q},{t:e},{i}")?;
                for v in node {
                    write!(out, ",{v:e}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub max_periods: usize,
    pub samples_per_period: usize,
    pub cfl: f64,
    pub periodic_tol: f64,
}

impl OracleSettings {
    pub fn new(max_periods: usize, samples_per_period: usize) -> Self {
        Self { max_periods, samples_per_period, cfl: DEFAULT_CFL, periodic_tol: PERIODIC_TOL }
    }
}

/// What the unsteady run did besides producing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub series: TimeSeries,
    pub periods: usize,
    pub steps_per_period: usize,
    pub time_step: f64,
    pub last_change: f64,
}

/// Smallest sample count that resolves every retained harmonic of `spec`.
pub fn min_samples(spec: &HarmonicSpec, base_omega: f64) -> usize {
    let lmax = spec.omegas().iter().map(|w| (w / base_omega).round() as usize).max().unwrap_or(0);
    4 * lmax + 2
}

pub fn unsteady_solve(config: &CaseConfig, periods_to_run: usize, samples_per_period: usize) -> Result<TimeSeries> {
    Ok(unsteady_run(config, &OracleSettings::new(periods_to_run, samples_per_period))?.series)
}

pub fn unsteady_run(config: &CaseConfig, settings: &OracleSettings) -> Result<OracleRun> {
    config.validate()?;
    if !(config.base_omega > 0.0) {
        return Err(Error::Config("the oracle needs a positive base frequency".into()));
    }
    for w in config.harmonics.omegas() {
        on_grid(w, config.base_omega)?;
    }
    let need = min_samples(&config.harmonics, config.base_omega);
    if settings.samples_per_period < need {
        return Err(Error::Config(format!(
            "{} samples per period cannot resolve the retained harmonics; need at least {need}",
            settings.samples_per_period
        )));
    }
    if settings.max_periods == 0 || !(settings.cfl > 0.0) {
        return Err(Error::Config("the oracle needs at least one period and a positive cfl".into()));
    }
    let physics = Physics::from_config(config);
    let mesh = build_mesh(config)?;
    let steady = steady_state(config)?;
    let period = 2.0 * PI / config.base_omega;
    let dt_max = settings.cfl * stable_step(&physics, &mesh, steady.values());
    let samples = settings.samples_per_period;
    let substeps = (period / (dt_max * samples as f64)).ceil().max(1.0) as usize;
    let steps = substeps * samples;
    let dt = period / steps as f64;

    let stepper = Stepper::new(config, &physics, &mesh, steady)?;
    let mut q = stepper.conservative_of_reference();
    let mut previous = stepper.primitive(&q);
    let mut change = f64::INFINITY;
    let mut periods = 0;
    while periods < settings.max_periods {
        for s in 0..steps {
            stepper.step(&mut q, (periods * steps + s) as f64 * dt, dt)?;
        }
        periods += 1;
        let now = stepper.primitive(&q);
        change = stepper.relative_change(&now, &previous);
        previous = now;
        if change < settings.periodic_tol {
            break;
        }
    }
    if !(change < settings.periodic_tol) {
        return Err(Error::NonPeriodic { periods, change });
    }
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        out.push(stepper.primitive(&q));
        if k + 1 < samples {
            for s in 0..substeps {
                stepper.step(&mut q, ((periods * samples + k) * substeps + s) as f64 * dt, dt)?;
            }
        }
    }
    let series = TimeSeries::new(physics.block(), mesh.n_nodes(), period, periods as f64 * period, out)?;
    Ok(OracleRun { series, periods, steps_per_period: steps, time_step: dt, last_change: change })
}

/// Converged steady state of the case without forcing.
pub fn steady_state(config: &CaseConfig) -> Result<PrimitiveState> {
    let mut cfg = config.clone();
    cfg.harmonics = HarmonicSpec::empty();
    cfg.scheme.mode = Mode::Implicit;
    cfg.scheme.cfl = 50.0;
    cfg.scheme.mg_levels = 1;
    cfg.scheme.partitions = 1;
    cfg.scheme.workers = 1;
    cfg.scheme.target_drop = 12.0;
    cfg.scheme.max_iters = 5000;
    let out = Solver::new(cfg)?.run();
    match out.termination {
        crate::driver::Termination::Divergence => Err(Error::Divergence { field: "steady mean".into(), stage: 0 }),
        _ => Ok(out.mean),
    }
}

/// Global step from the summed convective and diffusive face speeds of each
/// control volume.
pub fn stable_step(physics: &Physics, mesh: &Mesh, w: &[f64]) -> f64 {
    let mut rate = vec![0.0; mesh.n_nodes()];
    let speed = |node: usize, n: [f64; 2]| match physics {
        Physics::Euler(m) => {
            let x = &w[3 * node..3 * node + 3];
            x[1].abs() * n[0].abs() + (m.gamma * x[2] / x[0]).sqrt()
        }
        Physics::Scalar(m) => {
            let d = if n[0].abs() > 0.5 { mesh.dx() } else { mesh.dy() };
            m.speed.abs() * n[0].abs() + 4.0 * m.diffusivity / d
        }
    };
    for f in mesh.faces() {
        rate[f.left] += f.area * speed(f.left, f.normal);
        if let crate::model::FaceNeighbor::Node(r) = f.right {
            rate[r] += f.area * speed(r, f.normal);
        }
    }
    rate.iter().zip(mesh.volumes()).filter(|(r, _)| **r > 0.0).map(|(r, v)| v / r).fold(f64::INFINITY, f64::min)
}

struct Stepper<'a> {
    physics: &'a Physics,
    mesh: &'a Mesh,
    reference: PrimitiveState,
    reference_bnd: Vec<f64>,
    forcings: Vec<Vec<Complex64>>,
    omegas: Vec<f64>,
    scales: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(config: &CaseConfig, physics: &'a Physics, mesh: &'a Mesh, reference: PrimitiveState) -> Result<Self> {
        let reference_bnd = physics.mean_boundary(mesh, reference.values())?;
        let entries = config.harmonics.entries();
        let forcings = entries.iter().map(|e| physics.harmonic_forcing(mesh, e, config.forcing_amplitude)).collect();
        let scales = physics.variable_scales(reference.values());
        Ok(Self { physics, mesh, reference, reference_bnd, forcings, omegas: config.harmonics.omegas(), scales })
    }

    fn conservative_of_reference(&self) -> Vec<f64> {
        self.conservative(self.reference.values())
    }

    fn conservative(&self, w: &[f64]) -> Vec<f64> {
        match self.physics {
            Physics::Euler(m) => {
                let mut q = vec![0.0; w.len()];
                w.chunks(3).zip(q.chunks_mut(3)).for_each(|(w, q)| conservative_node(w, m.gamma, q));
                q
            }
            Physics::Scalar(_) => w.to_vec(),
        }
    }

    fn primitive(&self, q: &[f64]) -> Vec<f64> {
        match self.physics {
            Physics::Euler(m) => {
                let mut w = vec![0.0; q.len()];
                q.chunks(3).zip(w.chunks_mut(3)).for_each(|(q, w)| primitive_node(q, m.gamma, w));
                w
            }
            Physics::Scalar(_) => q.to_vec(),
        }
    }

    /// Time derivative of the conserved variables.
    fn rate(&self, q: &[f64], t: f64) -> Result<Vec<f64>> {
        let w = self.primitive(q);
        let b = self.physics.block();
        for (i, x) in w.chunks(b).enumerate() {
            if x.iter().any(|v| !v.is_finite()) || (b == 3 && (x[0] <= 0.0 || x[2] <= 0.0)) {
                return Err(Error::State { node: i, reason: format!("unsteady solution left the admissible set at t = {t:e}") });
            }
        }
        let dw: Vec<f64> = w.iter().zip(self.reference.values()).map(|(a, r)| a - r).collect();
        let refs: Vec<&[Complex64]> = self.forcings.iter().map(Vec::as_slice).collect();
        let mut forcing = vec![0.0; self.physics.forcing_len(self.mesh)];
        real_signal(&refs, &self.omegas, t, &mut forcing);
        let pert = self.physics.perturbation_boundary(self.mesh, self.reference.values(), &dw, &forcing);
        let bnd: Vec<f64> = self.reference_bnd.iter().zip(&pert).map(|(a, p)| a + p).collect();
        let r = self.physics.residual(self.mesh, &w, &bnd, Order::Second)?.total();
        Ok(r.iter().enumerate().map(|(k, v)| -v / self.mesh.volume(k / b)).collect())
    }

    fn step(&self, q: &mut [f64], t: f64, dt: f64) -> Result<()> {
        let shifted = |k: &[f64], s: f64| q.iter().zip(k).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        let k1 = self.rate(q, t)?;
        let k2 = self.rate(&shifted(&k1, 0.5 * dt), t + 0.5 * dt)?;
        let k3 = self.rate(&shifted(&k2, 0.5 * dt), t + 0.5 * dt)?;
        let k4 = self.rate(&shifted(&k3, dt), t + dt)?;
        for (i, v) in q.iter_mut().enumerate() {
            *v += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }

    /// L2 change between two states, each variable measured against its own
    /// magnitude in the reference state.
    fn relative_change(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.scales.len();
        let sum: f64 = a.iter().zip(b).enumerate().map(|(k, (x, y))| ((x - y) / self.scales[k % n]).powi(2)).sum();
        (sum / a.len() as f64).sqrt()
    }
}

fn on_grid(omega: f64, base: f64) -> Result<usize> {
    let ratio = omega / base;
    let l = ratio.round();
    if l < 0.0 || (ratio - l).abs() > 1e-9 * ratio.abs().max(1.0) {
        return Err(Error::Config(format!("frequency {omega} is not a multiple of the base frequency {base}")));
    }
    Ok(l as usize)
}

/// Discrete Fourier coefficients of the sampled period in the conjugate-pair
/// convention `W(t) = mean + sum 2 Re(W_l exp(i omega_l t))`.
pub fn extract_harmonics(ts: &TimeSeries, spec: &HarmonicSpec) -> Result<(PrimitiveState, Vec<HarmonicField>)> {
    let n = ts.sample_count();
    let base = 2.0 * PI / ts.period;
    let mut orders = Vec::with_capacity(spec.len());
    for e in spec.entries() {
        orders.push(on_grid(e.omega, base)?);
    }
    let lmax = orders.iter().copied().max().unwrap_or(0);
    if n < 4 * lmax + 2 {
        return Err(Error::Config(format!("{n} samples cannot resolve harmonic order {lmax}; need {}", 4 * lmax + 2)));
    }
    let len = ts.block * ts.n_nodes;
    let mut mean = vec![0.0; len];
    for s in &ts.samples {
        mean.iter_mut().zip(s).for_each(|(m, v)| *m += v / n as f64);
    }
    let mut fields = Vec::with_capacity(spec.len());
    for e in spec.entries() {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for (q, s) in ts.samples.iter().enumerate() {
            let phase = Complex64::new(0.0, -e.omega * ts.time(q)).exp() / n as f64;
            acc.iter_mut().zip(s).for_each(|(a, v)| *a += phase * v);
        }
        if e.omega == 0.0 {
            acc.iter_mut().for_each(|a| *a = 0.5 * *a);
        }
        fields.push(HarmonicField::new(e.index, e.omega, ts.block, acc)?);
    }
    Ok((PrimitiveState::new(ts.block, mean)?, fields))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicError {
    pub index: usize,
    pub omega: f64,
    pub relative_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub errors: Vec<HarmonicError>,
}

impl ComparisonReport {
    pub fn error(&self, index: usize) -> Option<f64> {
        self.errors.iter().find(|e| e.index == index).map(|e| e.relative_l2)
    }
}

/// Whether `node` is at least [`EXCLUDED_LAYERS`] cells away from every
/// non-periodic boundary.
pub fn is_interior(mesh: &Mesh, node: usize) -> bool {
    let k = EXCLUDED_LAYERS;
    let away = |i: usize, n: usize| i >= k && i + k < n;
    away(mesh.ix(node), mesh.nx()) && (mesh.ny() == 1 || mesh.periodic_y() || away(mesh.iy(node), mesh.ny()))
}

/// Relative L2 difference of each harmonic over interior nodes, measured
/// against the first set of amplitudes.
pub fn compare_amplitudes(mesh: &Mesh, fnlh: &[HarmonicField], oracle: &[HarmonicField]) -> Result<ComparisonReport> {
    if fnlh.len() != oracle.len() {
        return Err(Error::Config(format!("{} harmonics compared with {}", fnlh.len(), oracle.len())));
    }
    let mut errors = Vec::with_capacity(fnlh.len());
    for (a, b) in fnlh.iter().zip(oracle) {
        if a.index != b.index || (a.omega - b.omega).abs() > 1e-12 * a.omega.abs().max(1.0) {
            return Err(Error::Config(format!("harmonic {} ({}) compared with {} ({})", a.index, a.omega, b.index, b.omega)));
        }
        if a.block() != b.block() || a.n_nodes() != mesh.n_nodes() || b.n_nodes() != mesh.n_nodes() {
            return Err(Error::Config(format!("harmonic {} does not match the mesh", a.index)));
        }
        let (mut diff, mut norm) = (0.0, 0.0);
        for node in (0..mesh.n_nodes()).filter(|&i| is_interior(mesh, i)) {
            for (x, y) in a.node(node).iter().zip(b.node(node)) {
                diff += (x - y).norm_sqr();
                norm += x.norm_sqr();
            }
        }
        let relative_l2 = if norm > 0.0 {
            (diff / norm).sqrt()
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        errors.push(HarmonicError { index: a.index, omega: a.omega, relative_l2 });
    }
    Ok(ComparisonReport { errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{advdiff_exact_harmonic, HarmonicEntry};
    use crate::state::reconstruct_instantaneous;
    use proptest::prelude::*;

    fn single(omega: f64) -> HarmonicSpec {
        HarmonicSpec::new(vec![HarmonicEntry { index: 1, omega, inlet: vec![], outlet: vec![] }]).unwrap()
    }

    fn series(signal: impl Fn(f64) -> f64, samples: usize, period: f64) -> TimeSeries {
        let values = (0..samples).map(|q| vec![signal(period * q as f64 / samples as f64)]).collect();
        TimeSeries::new(1, 1, period, 0.0, values).unwrap()
    }

    #[test]
    fn constant_signal_has_no_harmonics() {
        let ts = series(|_| 3.5, 10, 2.0);
        let (mean, h) = extract_harmonics(&ts, &single(PI)).unwrap();
        assert!((mean.values()[0] - 3.5).abs() < 1e-15);
        assert!(h[0].values()[0].norm() < 1e-15);
    }

    #[test]
    fn cosine_and_sine_phase_convention() {
        let (_, h) = extract_harmonics(&series(|t| 2.0 * (PI * t).cos(), 6, 2.0), &single(PI)).unwrap();
        assert!((h[0].values()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let (_, h) = extract_harmonics(&series(|t| 2.0 * (PI * t).sin(), 6, 2.0), &single(PI)).unwrap();
        assert!((h[0].values()[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn off_grid_frequency_rejected() {
        let ts = series(|_| 1.0, 12, 2.0);
        assert!(matches!(extract_harmonics(&ts, &single(1.5 * PI)), Err(Error::Config(_))));
    }

    #[test]
    fn too_few_samples_rejected() {
        let ts = series(|_| 1.0, 5, 2.0);
        assert!(matches!(extract_harmonics(&ts, &single(PI)), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn extract_reconstruct_round_trip(
            mean in -5.0f64..5.0,
            amps in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
            start in 0.0f64..10.0,
        ) {
            let period = 0.7;
            let base = 2.0 * PI / period;
            let entries: Vec<HarmonicEntry> = (1..=3)
                .map(|l| HarmonicEntry { index: l, omega: base * l as f64, inlet: vec![], outlet: vec![] })
                .collect();
            let spec = HarmonicSpec::new(entries).unwrap();
            let truth: Vec<HarmonicField> = spec
                .entries()
                .iter()
                .zip(&amps)
                .map(|(e, (re, im))| HarmonicField::new(e.index, e.omega, 1, vec![Complex64::new(*re, *im)]).unwrap())
                .collect();
            let m = PrimitiveState::new(1, vec![mean]).unwrap();
            let n = 14;
            let samples = (0..n)
                .map(|q| reconstruct_instantaneous(&m, &truth, start + period * q as f64 / n as f64).unwrap().into_values())
                .collect();
            let ts = TimeSeries::new(1, 1, period, start, samples).unwrap();
            let (got_mean, got) = extract_harmonics(&ts, &spec).unwrap();
            prop_assert!((got_mean.values()[0] - mean).abs() < 1e-10);
            for (g, t) in got.iter().zip(&truth) {
                prop_assert!((g.values()[0] - t.values()[0]).norm() < 1e-10);
            }
            for q in 0..n {
                let t = ts.time(q);
                let back = reconstruct_instantaneous(&got_mean, &got, t).unwrap();
                prop_assert!((back.values()[0] - ts.samples[q][0]).abs() < 1e-10);
            }
        }
    }

    fn field(vals: Vec<Complex64>) -> HarmonicField {
        HarmonicField::new(1, PI, 1, vals).unwrap()
    }

    #[test]
    fn comparison_of_identical_and_scaled_amplitudes() {
        let cfg = CaseConfig::scalar(16, 1, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let a = field((0..16).map(|i| Complex64::new((i as f64).sin(), 0.3 * i as f64)).collect());
        let same = compare_amplitudes(&mesh, std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap();
        assert_eq!(same.error(1), Some(0.0));
        let scaled = field(a.values().iter().map(|z| 1.02 * z).collect());
        let e = compare_amplitudes(&mesh, &[a], &[scaled]).unwrap().error(1).unwrap();
        assert!((e - 0.02).abs() < 1e-12, "{e}");
    }

    #[test]
    fn comparison_ignores_boundary_layers() {
        let cfg = CaseConfig::scalar(8, 1, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let a = field(vec![Complex64::new(1.0, 0.0); 8]);
        let mut vals = a.values().to_vec();
        vals[0] = Complex64::new(9.0, 0.0);
        vals[7] = Complex64::new(-4.0, 2.0);
        let e = compare_amplitudes(&mesh, &[a], &[field(vals)]).unwrap();
        assert_eq!(e.error(1), Some(0.0));
    }

    #[test]
    fn comparison_rejects_mismatched_spec() {
        let cfg = CaseConfig::scalar(8, 1, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let a = field(vec![Complex64::new(1.0, 0.0); 8]);
        let b = HarmonicField::new(2, 2.0 * PI, 1, a.values().to_vec()).unwrap();
        assert!(matches!(compare_amplitudes(&mesh, std::slice::from_ref(&a), &[b]), Err(Error::Config(_))));
        assert!(matches!(compare_amplitudes(&mesh, &[a], &[]), Err(Error::Config(_))));
    }

    #[test]
    fn unforced_run_is_steady() {
        let cfg = CaseConfig::parse("kind = scalar-advdiff-1d\nnx = 16\nforcing_amplitude = 0\n").unwrap();
        let ts = unsteady_solve(&cfg, 20, 6).unwrap();
        assert_eq!(ts.sample_count(), 6);
        assert!(ts.spread() < 1e-9, "{}", ts.spread());
    }

    #[test]
    fn unforced_nozzle_is_steady() {
        let mut cfg = CaseConfig::nozzle(16, 1);
        cfg.forcing_amplitude = 0.0;
        let ts = unsteady_solve(&cfg, 20, 6).unwrap();
        let scale = 1e5;
        assert!(ts.spread() < 1e-9 * scale, "{}", ts.spread());
    }

    #[test]
    fn undersampling_rejected() {
        let cfg = CaseConfig::scalar(16, 1, 2);
        assert!(matches!(unsteady_solve(&cfg, 10, 9), Err(Error::Config(_))));
    }

    #[test]
    fn period_cap_reports_non_periodic() {
        let cfg = CaseConfig::scalar(32, 1, 1);
        assert!(matches!(unsteady_solve(&cfg, 1, 6), Err(Error::NonPeriodic { periods: 1, .. })));
    }

    fn advection_case(nx: usize) -> CaseConfig {
        CaseConfig::parse(&format!("kind = scalar-advdiff-1d\nnx = {nx}\ndiffusivity = 0\n")).unwrap()
    }

    fn advection_error(nx: usize) -> f64 {
        let cfg = advection_case(nx);
        let mesh = build_mesh(&cfg).unwrap();
        let ts = unsteady_solve(&cfg, MAX_PERIODS, 16).unwrap();
        let (_, h) = extract_harmonics(&ts, &cfg.harmonics).unwrap();
        let (mut diff, mut norm) = (0.0, 0.0);
        for node in (0..nx).filter(|&i| is_interior(&mesh, i)) {
            let x = mesh.coord(node)[0];
            let exact = advdiff_exact_harmonic(x, 0.0, cfg.base_omega, 1.0, 0.0, 0.0).unwrap();
            diff += (h[0].values()[node] - exact).norm_sqr();
            norm += exact.norm_sqr();
        }
        (diff / norm).sqrt()
    }

    #[test]
    fn pure_advection_matches_closed_form_at_second_order() {
        let coarse = advection_error(32);
        let fine = advection_error(64);
        assert!(fine < 0.02, "{coarse} {fine}");
        let order = (coarse / fine).log2();
        assert!(order > 1.6, "observed order {order} ({coarse} -> {fine})");
    }

    #[test]
    fn halving_time_step_is_below_spatial_error() {
        let cfg = advection_case(32);
        let run = |cfl: f64| {
            let mut s = OracleSettings::new(MAX_PERIODS, 16);
            s.cfl = cfl;
            let r = unsteady_run(&cfg, &s).unwrap();
            extract_harmonics(&r.series, &cfg.harmonics).unwrap().1.remove(0)
        };
        let (a, b) = (run(1.0), run(0.5));
        let temporal = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let spatial = advection_error(32);
        assert!(temporal < 0.1 * spatial, "temporal {temporal} spatial {spatial}");
    }

    #[test]
    fn time_series_csv_layout() {
        let ts = TimeSeries::new(1, 2, 1.0, 0.0, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf, &["u"]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "sample,time,node,u");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("1,5e-1,1,"));
    }
}
