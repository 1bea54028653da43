//! Outer iteration: harmonics against the frozen mean, then the deterministic
//! flux from the new harmonics, then the mean with that flux.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_mesh, nozzle_steady_reference, CaseConfig, Mesh, Mode};
use crate::multigrid::{resolved_depth, v_cycle, CorrectedState, GridHierarchy};
use crate::residual::{
    assemble_jacobian_into, build_pattern, deterministic_flux, to_conservative_columns, DeterministicFlux,
    Linearization, Physics,
};
use crate::rk::{build_lhs_harmonic_into, build_lhs_mean_into, HarmonicSystem, LinearPolicy, MeanSystem, RkConfig};
use crate::sparse::{AllocationCounter, FactorKind, LhsSlot, LhsStore, LinearSolveReport, PartitionMap, RealMatrix, Scalar};
use crate::state::{check_node, HarmonicField, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetDrop,
    IterationCap,
    Divergence,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::TargetDrop => "target-drop",
            Termination::IterationCap => "iteration-cap",
            Termination::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    pub mean: f64,
    pub harmonics: Vec<f64>,
    pub r_z: Option<f64>,
    pub seconds: f64,
    pub work_units: f64,
}

/// Aggregate of every linear solve in a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearStats {
    pub solves: usize,
    pub iterations: usize,
    pub converged: usize,
    pub capped: usize,
    /// Solves that neither met the tolerance nor used the full iteration budget.
    pub violations: usize,
    pub worst_relative: f64,
}

impl LinearStats {
    pub fn record(&mut self, r: &LinearSolveReport, policy: LinearPolicy) {
        self.solves += 1;
        self.iterations += r.iterations;
        let rel = r.relative_residual();
        match policy {
            LinearPolicy::Direct => self.converged += 1,
            LinearPolicy::Richardson { tol, max_iter } => {
                if rel <= tol {
                    self.converged += 1;
                } else if r.iterations == max_iter {
                    self.capped += 1;
                } else {
                    self.violations += 1;
                }
                self.worst_relative = self.worst_relative.max(rel);
            }
        }
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.iterations as f64 / self.solves as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub mean: PrimitiveState,
    pub harmonics: Vec<HarmonicField>,
    pub history: Vec<ConvergenceRecord>,
    pub termination: Termination,
    pub message: Option<String>,
    pub linear: LinearStats,
    pub reference_time: f64,
    pub lhs_bytes: usize,
}

impl SolveOutcome {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

pub fn rms<T: Scalar>(v: &[T]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x.modulus_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

/// Root mean square of the per-harmonic residuals; absent without harmonics.
pub fn aggregate_rz(harmonics: &[f64]) -> Option<f64> {
    if harmonics.is_empty() {
        None
    } else {
        Some((harmonics.iter().map(|r| r * r).sum::<f64>() / harmonics.len() as f64).sqrt())
    }
}

pub fn residual_monitor(
    iteration: usize,
    mean: &[f64],
    harmonics: &[Vec<Complex64>],
    seconds: f64,
    work_units: f64,
) -> ConvergenceRecord {
    let h: Vec<f64> = harmonics.iter().map(|r| rms(r)).collect();
    ConvergenceRecord { iteration, mean: rms(mean), r_z: aggregate_rz(&h), harmonics: h, seconds, work_units }
}

const KERNEL_SIZE: usize = 512;
const KERNEL_SWEEPS: usize = 10;
const KERNEL_REPEATS: usize = 3;

/// Five-point Jacobi sweeps on a fixed grid; returns a checksum.
pub fn normalization_kernel() -> f64 {
    let n = KERNEL_SIZE;
    let mut u = vec![0.0f64; n * n];
    let mut v = vec![0.0f64; n * n];
    u[..n].fill(1.0);
    for _ in 0..KERNEL_SWEEPS {
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                v[k] = 0.25 * (u[k - 1] + u[k + 1] + u[k - n] + u[k + n]);
            }
        }
        v[..n].copy_from_slice(&u[..n]);
        std::mem::swap(&mut u, &mut v);
    }
    u.iter().sum()
}

/// Best of several timed kernel runs, measured once per process.
pub fn reference_time() -> f64 {
    static TIME: OnceLock<f64> = OnceLock::new();
    *TIME.get_or_init(|| {
        (0..KERNEL_REPEATS)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(normalization_kernel());
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
            .max(1e-9)
    })
}

pub fn work_units(workers: usize, seconds: f64, reference: f64) -> f64 {
    workers as f64 * seconds / reference
}

/// Per-level data refreshed at the start of every outer iteration.
struct Level {
    jacobian: RealMatrix,
    store: LhsStore,
    forcings: Vec<Vec<Complex64>>,
}

pub struct Solver {
    config: CaseConfig,
    physics: Physics,
    hierarchy: GridHierarchy,
    rk: RkConfig,
    policy: LinearPolicy,
    levels: Vec<Level>,
    counter: AllocationCounter,
    mean: PrimitiveState,
    harmonics: Vec<HarmonicField>,
    df: DeterministicFlux,
    iteration: usize,
    linear: LinearStats,
    workers: usize,
}

/// What one outer iteration produced.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub mean_residual: Vec<f64>,
    pub harmonic_residuals: Vec<Vec<Complex64>>,
}

impl Solver {
    pub fn new(config: CaseConfig) -> Result<Self> {
        config.validate()?;
        let physics = Physics::from_config(&config);
        let mesh = build_mesh(&config)?;
        let partitions = PartitionMap::contiguous(mesh.n_nodes(), config.scheme.partitions)?;
        let mesh = mesh.with_partitions(partitions)?;
        let mean = match physics {
            Physics::Euler(_) => nozzle_steady_reference(&config)?,
            Physics::Scalar(_) => PrimitiveState::new(1, vec![0.0; mesh.n_nodes()])?,
        };
        Self::with_state(config, physics, mesh, mean)
    }

    fn with_state(config: CaseConfig, physics: Physics, mesh: Mesh, mean: PrimitiveState) -> Result<Self> {
        let rk = RkConfig::from_scheme(&config.scheme);
        let policy = LinearPolicy::for_config(&rk);
        let kind = match rk.mode {
            Mode::Explicit => FactorKind::BlockJacobi,
            Mode::Implicit => FactorKind::Ilu0,
        };
        let hierarchy = GridHierarchy::new(mesh, config.scheme.mg_levels)?;
        let counter = AllocationCounter::new();
        let n_h = config.n_harmonics();
        let workers = config.scheme.workers.max(1);
        let workspaces = if n_h > 0 { workers } else { 0 };
        let b = physics.block();
        let mut levels = Vec::with_capacity(hierarchy.len());
        for m in hierarchy.meshes() {
            let pattern = build_pattern(m, b)?;
            let store = LhsStore::new(pattern.clone(), kind, m.partitions().clone(), workspaces, counter.clone());
            let forcings =
                config.harmonics.entries().iter().map(|e| physics.harmonic_forcing(m, e, config.forcing_amplitude)).collect();
            levels.push(Level { jacobian: RealMatrix::zeros(pattern), store, forcings });
        }
        let n = hierarchy.mesh(0).n_nodes();
        let harmonics = config.harmonics.entries().iter().map(|e| HarmonicField::zeros(e.index, e.omega, n, b)).collect();
        let df = DeterministicFlux { values: vec![0.0; n * b], iteration: 0, harmonic_iteration: 0 };
        Ok(Self {
            config,
            physics,
            hierarchy,
            rk,
            policy,
            levels,
            counter,
            mean,
            harmonics,
            df,
            iteration: 0,
            linear: LinearStats::default(),
            workers,
        })
    }

    pub fn set_state(&mut self, mean: PrimitiveState, harmonics: Vec<HarmonicField>) -> Result<()> {
        if mean.values().len() != self.mean.values().len() || harmonics.len() != self.harmonics.len() {
            return Err(Error::Shape("initial state does not match the case".into()));
        }
        mean.check_admissible()?;
        self.mean = mean;
        self.harmonics = harmonics;
        Ok(())
    }

    pub fn config(&self) -> &CaseConfig {
        &self.config
    }

    pub fn physics(&self) -> &Physics {
        &self.physics
    }

    pub fn mesh(&self) -> &Mesh {
        self.hierarchy.mesh(0)
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        &self.hierarchy
    }

    pub fn mean(&self) -> &PrimitiveState {
        &self.mean
    }

    pub fn harmonics(&self) -> &[HarmonicField] {
        &self.harmonics
    }

    pub fn deterministic_flux(&self) -> &DeterministicFlux {
        &self.df
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn linear_stats(&self) -> LinearStats {
        self.linear
    }

    pub fn allocation_counter(&self) -> &AllocationCounter {
        &self.counter
    }

    /// Bytes of LHS value storage over all levels.
    pub fn lhs_bytes(&self) -> usize {
        self.levels.iter().map(|l| l.store.lhs_bytes()).sum()
    }

    fn level_scheme(&self, level: usize) -> RkConfig {
        if level == 0 {
            self.rk
        } else {
            self.rk.coarse_level()
        }
    }

    /// Mean state restricted to every level.
    fn level_means(&self) -> Vec<Vec<f64>> {
        let b = self.physics.block();
        let mut means = vec![self.mean.values().to_vec()];
        for l in 1..self.hierarchy.len() {
            let next = self.hierarchy.restrict_state(l - 1, &means[l - 1], b);
            means.push(next);
        }
        means
    }

    fn refresh_operators(&mut self, means: &[Vec<f64>]) -> Result<()> {
        let schemes: Vec<RkConfig> = (0..self.levels.len()).map(|l| self.level_scheme(l)).collect();
        for (l, level) in self.levels.iter_mut().enumerate() {
            let mesh = self.hierarchy.mesh(l);
            assemble_jacobian_into(&self.physics, mesh, &means[l], &mut level.jacobian)?;
            to_conservative_columns(&self.physics, &means[l], &mut level.jacobian);
            build_lhs_mean_into(&level.jacobian, &schemes[l], 5, &mut level.store.mean.matrix)?;
            level.store.mean.refactor()?;
        }
        Ok(())
    }

    fn advance_harmonics(&mut self, means: &[Vec<f64>]) -> Result<Vec<(HarmonicField, Vec<Complex64>, Vec<LinearSolveReport>)>> {
        let n_h = self.harmonics.len();
        if n_h == 0 {
            return Ok(Vec::new());
        }
        let physics = &self.physics;
        let hierarchy = &self.hierarchy;
        let lins: Vec<Linearization> = (0..hierarchy.len())
            .map(|l| Linearization::new(physics, hierarchy.mesh(l), &means[l], hierarchy.order(l)))
            .collect::<Result<_>>()?;
        let schemes: Vec<RkConfig> = (0..hierarchy.len()).map(|l| self.level_scheme(l)).collect();
        let workers = self.workers.min(n_h);
        let mut buckets: Vec<Vec<&mut LhsSlot<Complex64>>> = (0..workers).map(|_| Vec::new()).collect();
        let mut shared = Vec::with_capacity(self.levels.len());
        let mut forcings = Vec::with_capacity(self.levels.len());
        for level in self.levels.iter_mut() {
            let (mean_slot, slots) = level.store.split_mut();
            shared.push(&mean_slot.matrix);
            forcings.push(&level.forcings);
            for (w, slot) in slots.iter_mut().take(workers).enumerate() {
                buckets[w].push(slot);
            }
        }
        let ctx = HarmonicContext {
            physics,
            hierarchy,
            schemes: &schemes,
            policy: self.policy,
            means,
            lins: &lins,
            lhs_means: &shared,
            forcings: &forcings,
        };
        let harmonics = &self.harmonics;
        let mut results: Vec<Option<Result<_>>> = (0..n_h).map(|_| None).collect();
        if workers == 1 {
            let slots = buckets.pop().expect("one worker");
            for (h, r) in ctx.run_bucket(0, 1, slots, harmonics) {
                results[h] = Some(r);
            }
        } else {
            let ctx = &ctx;
            let done: Vec<Vec<(usize, Result<_>)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = buckets
                    .into_iter()
                    .enumerate()
                    .map(|(w, slots)| scope.spawn(move || ctx.run_bucket(w, workers, slots, harmonics)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("harmonic worker panicked")).collect()
            });
            for (h, r) in done.into_iter().flatten() {
                results[h] = Some(r);
            }
        }
        results.into_iter().map(|r| r.expect("every harmonic assigned")).collect()
    }

    /// One outer iteration; on error the solver state is left unchanged.
    pub fn outer_iteration(&mut self) -> Result<IterationReport> {
        let means = self.level_means();
        self.refresh_operators(&means)?;
        let updated = self.advance_harmonics(&means)?;
        let iteration = self.iteration + 1;
        let mut new_harmonics = Vec::with_capacity(updated.len());
        let mut harmonic_residuals = Vec::with_capacity(updated.len());
        let mut reports = Vec::new();
        for (h, r, rep) in updated {
            new_harmonics.push(h);
            harmonic_residuals.push(r);
            reports.extend(rep);
        }
        let forcings = &self.levels[0].forcings;
        let df_values = deterministic_flux(&self.physics, self.mesh(), &self.mean, &new_harmonics, forcings)?;
        let df = DeterministicFlux { values: df_values, iteration, harmonic_iteration: iteration };

        let b = self.physics.block();
        let mut systems: Vec<MeanSystem> = (0..self.hierarchy.len())
            .map(|l| {
                let sys = MeanSystem::new(
                    &self.physics,
                    self.hierarchy.mesh(l),
                    self.hierarchy.order(l),
                    &self.levels[l].store.mean,
                    self.policy,
                );
                if l == 0 {
                    sys.with_df(&df.values)
                } else {
                    sys
                }
            })
            .collect();
        let out = v_cycle(&self.hierarchy, &mut systems, self.mean.values(), b)?;
        drop(systems);
        reports.extend(out.linear);
        for r in &reports {
            self.linear.record(r, self.policy);
        }
        self.mean = PrimitiveState::new(b, out.state)?;
        self.harmonics = new_harmonics;
        self.df = df;
        self.iteration = iteration;
        Ok(IterationReport { mean_residual: out.residual, harmonic_residuals })
    }

    /// Iterates until the mean and aggregate harmonic residuals have both
    /// dropped by the configured orders, the cap is hit, or a field diverges.
    pub fn run(&mut self) -> SolveOutcome {
        let reference = self.config.scheme.reference_time.unwrap_or_else(reference_time);
        let drop = 10f64.powf(-self.config.scheme.target_drop);
        let start = Instant::now();
        let mut history: Vec<ConvergenceRecord> = Vec::new();
        let mut termination = Termination::IterationCap;
        let mut message = None;
        for _ in 0..self.config.scheme.max_iters {
            let report = match self.outer_iteration() {
                Ok(r) => r,
                Err(e) => {
                    termination = Termination::Divergence;
                    message = Some(e.to_string());
                    break;
                }
            };
            let seconds = start.elapsed().as_secs_f64();
            let rec = residual_monitor(
                self.iteration,
                &report.mean_residual,
                &report.harmonic_residuals,
                seconds,
                work_units(self.workers, seconds, reference),
            );
            let finite = rec.mean.is_finite() && rec.r_z.is_none_or(f64::is_finite);
            history.push(rec);
            if !finite {
                termination = Termination::Divergence;
                message = Some("residual is not finite".into());
                break;
            }
            let (first, last) = (&history[0], history.last().expect("just pushed"));
            let mean_ok = last.mean <= first.mean * drop;
            let rz_ok = match (first.r_z, last.r_z) {
                (Some(a), Some(b)) => b <= a * drop,
                _ => true,
            };
            if mean_ok && rz_ok {
                termination = Termination::TargetDrop;
                break;
            }
        }
        SolveOutcome {
            mean: self.mean.clone(),
            harmonics: self.harmonics.clone(),
            history,
            termination,
            message,
            linear: self.linear,
            reference_time: reference,
            lhs_bytes: self.lhs_bytes(),
        }
    }
}

pub fn run_to_convergence(config: &CaseConfig) -> Result<SolveOutcome> {
    Ok(Solver::new(config.clone())?.run())
}

struct HarmonicContext<'a> {
    physics: &'a Physics,
    hierarchy: &'a GridHierarchy,
    schemes: &'a [RkConfig],
    policy: LinearPolicy,
    means: &'a [Vec<f64>],
    lins: &'a [Linearization<'a>],
    lhs_means: &'a [&'a RealMatrix],
    forcings: &'a [&'a Vec<Vec<Complex64>>],
}

type HarmonicResult = Result<(HarmonicField, Vec<Complex64>, Vec<LinearSolveReport>)>;

impl HarmonicContext<'_> {
    /// Advances harmonics `worker, worker + stride, ...` using one complex
    /// workspace per level.
    fn run_bucket(
        &self,
        worker: usize,
        stride: usize,
        mut slots: Vec<&mut LhsSlot<Complex64>>,
        harmonics: &[HarmonicField],
    ) -> Vec<(usize, HarmonicResult)> {
        (worker..harmonics.len())
            .step_by(stride)
            .map(|h| (h, self.advance(h, &harmonics[h], &mut slots)))
            .collect()
    }

    fn advance(&self, h: usize, field: &HarmonicField, slots: &mut [&mut LhsSlot<Complex64>]) -> HarmonicResult {
        let depth = resolved_depth(self.hierarchy, field.omega, self.physics.slowest_convection(&self.means[0]));
        let slots = &mut slots[..depth];
        for (l, slot) in slots.iter_mut().enumerate() {
            build_lhs_harmonic_into(self.lhs_means[l], self.hierarchy.mesh(l), field.omega, &self.schemes[l], 5, &mut slot.matrix)?;
            slot.refactor()?;
        }
        let mut systems: Vec<HarmonicSystem> = slots
            .iter()
            .enumerate()
            .map(|(l, slot)| {
                HarmonicSystem::new(
                    field.index,
                    field.omega,
                    self.physics,
                    &self.means[l],
                    &self.lins[l],
                    &self.forcings[l][h],
                    slot,
                    self.policy,
                )
            })
            .collect();
        let out = v_cycle(self.hierarchy, &mut systems, field.values(), self.physics.block())?;
        let next = HarmonicField::new(field.index, field.omega, self.physics.block(), out.state)?;
        Ok((next, out.residual, out.linear))
    }
}

impl CorrectedState for MeanSystem<'_> {
    fn check(&self, state: &[f64]) -> Result<()> {
        let b = self.physics.block();
        state.chunks(b).enumerate().try_for_each(|(i, w)| check_node(i, w))
    }
}

impl CorrectedState for HarmonicSystem<'_> {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rz_of_equal_values() {
        assert_eq!(aggregate_rz(&[0.5, 0.5, 0.5]), Some(0.5));
        assert!((aggregate_rz(&[3.0, 4.0]).unwrap() - (12.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(aggregate_rz(&[2.0]), Some(2.0));
        assert_eq!(aggregate_rz(&[]), None);
    }

    #[test]
    fn rms_uses_modulus() {
        let v = [Complex64::new(3.0, 4.0), Complex64::new(0.0, 0.0)];
        assert!((rms(&v) - (12.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_cap_returns_initial_state() {
        let mut cfg = CaseConfig::nozzle(16, 1);
        cfg.scheme.max_iters = 0;
        let out = run_to_convergence(&cfg).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.termination, Termination::IterationCap);
        assert_eq!(out.mean, nozzle_steady_reference(&cfg).unwrap());
    }

    #[test]
    fn df_is_stamped_with_current_iteration() {
        let mut s = Solver::new(CaseConfig::nozzle(16, 1)).unwrap();
        s.outer_iteration().unwrap();
        s.outer_iteration().unwrap();
        assert_eq!(s.deterministic_flux().iteration, 2);
        assert_eq!(s.deterministic_flux().harmonic_iteration, 2);
    }

    #[test]
    fn work_units_scale_linearly() {
        assert_eq!(work_units(2, 3.0, 0.5), 12.0);
        assert_eq!(work_units(2, 6.0, 0.5), 2.0 * work_units(2, 3.0, 0.5));
    }
}
