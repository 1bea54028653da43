//! Five-stage pseudo-time step shared by the mean flow and every harmonic.
//!
//! Stage `k` solves `(K / (Gamma alpha_k)) x = -(R - R*)`. The stage operators
//! differ only by the scalar `alpha_k`, so one operator `A1 = K / Gamma` is
//! built and factored per outer iteration and each stage solves
//! `A1 x = alpha_k B` instead.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Mesh, Mode, SchemeConfig};
use crate::residual::{Linearization, Order, Physics, SplitResidual};
use crate::sparse::{
    dense, smoothed_solve, ComplexMatrix, LhsSlot, LinearSolveReport, Preconditioner, RealMatrix, Scalar,
};
use crate::state::{check_node, conservative_node, inverse_transform_node, primitive_node};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u32,
    pub den: u32,
}

impl Rational {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

pub const STAGES: usize = 5;
pub const ALPHA: [Rational; STAGES] =
    [Rational::new(1, 4), Rational::new(1, 6), Rational::new(3, 8), Rational::new(1, 2), Rational::new(1, 1)];
pub const BETA: [Rational; STAGES] =
    [Rational::new(1, 1), Rational::new(0, 1), Rational::new(14, 25), Rational::new(0, 1), Rational::new(11, 25)];

/// CFL ceiling on multigrid coarse levels in explicit mode. A first-order
/// operator scaled by its own diagonal has eigenvalues in the disc of radius
/// `cfl` centred at `-cfl`, which the stage scheme only damps up to about 1.3.
pub const COARSE_CFL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkConfig {
    pub mode: Mode,
    pub cfl: f64,
    pub eps: f64,
    pub linear_tol: f64,
    pub linear_max_iter: usize,
}

impl RkConfig {
    pub fn from_scheme(s: &SchemeConfig) -> Self {
        Self { mode: s.mode, cfl: s.cfl, eps: s.eps, linear_tol: s.linear_tol, linear_max_iter: s.linear_max_iter }
    }

    /// Scheme used on multigrid levels below the finest.
    pub fn coarse_level(&self) -> Self {
        match self.mode {
            Mode::Explicit => Self { cfl: self.cfl.min(COARSE_CFL), ..*self },
            Mode::Implicit => *self,
        }
    }

    /// `Gamma`: the CFL number when explicit, `1/eps` when implicit.
    pub fn gamma(&self) -> f64 {
        match self.mode {
            Mode::Explicit => self.cfl,
            Mode::Implicit => 1.0 / self.eps,
        }
    }
}

fn stage_index(stage: usize) -> Result<usize> {
    if (1..=STAGES).contains(&stage) {
        Ok(stage - 1)
    } else {
        Err(Error::Config(format!("stage {stage} outside 1..={STAGES}")))
    }
}

/// Writes `K / (Gamma alpha_k)` into `out`, where `K` is the diagonal blocks of
/// `j` (explicit) or `P/(eps cfl) + J` (implicit). `j` must be the Jacobian with
/// respect to the conservative variables.
pub fn build_lhs_mean_into(j: &RealMatrix, cfg: &RkConfig, stage: usize, out: &mut RealMatrix) -> Result<()> {
    let k = stage_index(stage)?;
    if out.pattern().as_ref() != j.pattern().as_ref() {
        return Err(Error::Shape("LHS buffer does not share the Jacobian pattern".into()));
    }
    let scale = 1.0 / (cfg.gamma() * ALPHA[k].value());
    let pattern = j.pattern().clone();
    out.fill_zero();
    for i in 0..pattern.n_rows() {
        let d = pattern.diag_pos(i);
        match cfg.mode {
            Mode::Explicit => {
                for (o, v) in out.block_at_mut(d).iter_mut().zip(j.block_at(d)) {
                    *o = v * scale;
                }
            }
            Mode::Implicit => {
                let pdiag = 1.0 / (cfg.eps * cfg.cfl);
                for pos in pattern.row(i) {
                    let extra = if pos == d { pdiag } else { 0.0 };
                    for (o, v) in out.block_at_mut(pos).iter_mut().zip(j.block_at(pos)) {
                        *o = (v + extra * v) * scale;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn build_lhs_mean(j: &RealMatrix, cfg: &RkConfig, stage: usize) -> Result<RealMatrix> {
    let mut out = RealMatrix::zeros(j.pattern().clone());
    build_lhs_mean_into(j, cfg, stage, &mut out)?;
    Ok(out)
}

/// Adds `i omega V_i / (Gamma alpha_k)` to the diagonal of a mean-flow LHS
/// built for the same stage.
pub fn build_lhs_harmonic_into(
    lhs_mean: &RealMatrix,
    mesh: &Mesh,
    omega: f64,
    cfg: &RkConfig,
    stage: usize,
    out: &mut ComplexMatrix,
) -> Result<()> {
    let k = stage_index(stage)?;
    let s = omega / (cfg.gamma() * ALPHA[k].value());
    let shifts: Vec<Complex64> = mesh.volumes().iter().map(|v| Complex64::new(0.0, s * v)).collect();
    crate::sparse::shift_diagonal_into(lhs_mean, &shifts, out)
}

pub fn build_lhs_harmonic(lhs_mean: &RealMatrix, mesh: &Mesh, omega: f64, cfg: &RkConfig, stage: usize) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(lhs_mean.pattern().clone());
    build_lhs_harmonic_into(lhs_mean, mesh, omega, cfg, stage, &mut out)?;
    Ok(out)
}

/// How a stage increment is obtained from a factored LHS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearPolicy {
    /// One application of the factor.
    Direct,
    /// Preconditioned Richardson iteration.
    Richardson { tol: f64, max_iter: usize },
}

impl LinearPolicy {
    pub fn for_config(cfg: &RkConfig) -> Self {
        match cfg.mode {
            Mode::Explicit => LinearPolicy::Direct,
            Mode::Implicit => LinearPolicy::Richardson { tol: cfg.linear_tol, max_iter: cfg.linear_max_iter },
        }
    }

    pub fn solve<T: Scalar>(&self, slot: &LhsSlot<T>, rhs: &[T]) -> Result<(Vec<T>, LinearSolveReport)> {
        match *self {
            LinearPolicy::Direct => {
                let mut x = vec![T::zero(); rhs.len()];
                slot.factor.apply(rhs, &mut x);
                let norm = crate::sparse::norm2(rhs);
                let report = LinearSolveReport { iterations: 1, initial_residual: norm, final_residual: 0.0, converged: true };
                Ok((x, report))
            }
            LinearPolicy::Richardson { tol, max_iter } => smoothed_solve(&slot.matrix, rhs, &slot.factor, tol, max_iter),
        }
    }
}

/// A field advanced by [`rk_step`].
pub trait StageSystem {
    type Value: Scalar;

    /// Name used in divergence reports.
    fn label(&self) -> String;

    /// Inviscid residual of `state` and, when `viscous` is set, a freshly
    /// evaluated viscous residual.
    fn evaluate(&mut self, state: &[Self::Value], viscous: bool) -> Result<(Vec<Self::Value>, Option<Vec<Self::Value>>)>;

    /// Approximate solution of `A1 x = rhs`.
    fn solve(&mut self, rhs: &[Self::Value]) -> Result<(Vec<Self::Value>, LinearSolveReport)>;

    /// Stage state from the step's initial state and a conservative increment.
    fn advance(&self, base: &[Self::Value], x: &[Self::Value]) -> Result<Vec<Self::Value>>;
}

#[derive(Debug, Clone)]
pub struct RkOutcome<T> {
    pub state: Vec<T>,
    /// Stage-1 residual `R(state0)` without multigrid forcing.
    pub residual: Vec<T>,
    pub linear: Vec<LinearSolveReport>,
}

fn as_divergence(e: Error, field: &str, stage: usize) -> Error {
    match e {
        Error::State { .. } | Error::LinearDivergence { .. } | Error::Unsupported(_) => {
            Error::Divergence { field: field.to_string(), stage }
        }
        other => other,
    }
}

pub fn rk_step<S: StageSystem>(sys: &mut S, state0: &[S::Value], forcing: Option<&[S::Value]>) -> Result<RkOutcome<S::Value>> {
    let label = sys.label();
    let mut state = state0.to_vec();
    let mut blended: Vec<S::Value> = Vec::new();
    let mut first = Vec::new();
    let mut linear = Vec::with_capacity(STAGES);
    for k in 0..STAGES {
        let beta = BETA[k];
        let (inv, fresh) = sys.evaluate(&state, beta.num != 0).map_err(|e| as_divergence(e, &label, k + 1))?;
        if let Some(fresh) = fresh {
            if beta.num == beta.den || blended.is_empty() {
                blended = fresh;
            } else {
                let b = beta.value();
                for (o, f) in blended.iter_mut().zip(&fresh) {
                    *o = f.scale(b) + o.scale(1.0 - b);
                }
            }
        }
        let total: Vec<S::Value> = inv.iter().zip(&blended).map(|(a, b)| *a + *b).collect();
        let alpha = ALPHA[k].value();
        let rhs: Vec<S::Value> = match forcing {
            Some(f) => total.iter().zip(f).map(|(r, s)| (*s - *r).scale(alpha)).collect(),
            None => total.iter().map(|r| (-*r).scale(alpha)).collect(),
        };
        if k == 0 {
            first = total;
        }
        let (x, report) = sys.solve(&rhs).map_err(|e| as_divergence(e, &label, k + 1))?;
        linear.push(report);
        state = sys.advance(state0, &x).map_err(|e| as_divergence(e, &label, k + 1))?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { field: label, stage: k + 1 });
        }
    }
    Ok(RkOutcome { state, residual: first, linear })
}

/// Mean-flow field on one grid level; the state is the primitive vector.
pub struct MeanSystem<'a> {
    pub physics: &'a Physics,
    pub mesh: &'a Mesh,
    pub order: Order,
    pub df: Option<&'a [f64]>,
    pub lhs: &'a LhsSlot<f64>,
    pub policy: LinearPolicy,
    pub viscous_evaluations: usize,
}

impl<'a> MeanSystem<'a> {
    pub fn new(physics: &'a Physics, mesh: &'a Mesh, order: Order, lhs: &'a LhsSlot<f64>, policy: LinearPolicy) -> Self {
        Self { physics, mesh, order, df: None, lhs, policy, viscous_evaluations: 0 }
    }

    pub fn with_df(mut self, df: &'a [f64]) -> Self {
        self.df = Some(df);
        self
    }
}

impl StageSystem for MeanSystem<'_> {
    type Value = f64;

    fn label(&self) -> String {
        "mean".into()
    }

    fn evaluate(&mut self, state: &[f64], viscous: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let bnd = self.physics.mean_boundary(self.mesh, state)?;
        let SplitResidual { mut inviscid, viscous: vis } = self.physics.residual(self.mesh, state, &bnd, self.order)?;
        if let Some(df) = self.df {
            inviscid.iter_mut().zip(df).for_each(|(r, d)| *r += d);
        }
        if viscous {
            self.viscous_evaluations += 1;
        }
        Ok((inviscid, viscous.then_some(vis)))
    }

    fn solve(&mut self, rhs: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
        self.policy.solve(self.lhs, rhs)
    }

    fn advance(&self, base: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let b = self.physics.block();
        let g = self.physics.gamma();
        let mut out = vec![0.0; base.len()];
        let mut q = vec![0.0; b];
        for (i, ((w0, dx), w)) in base.chunks(b).zip(x.chunks(b)).zip(out.chunks_mut(b)).enumerate() {
            conservative_node(w0, g, &mut q);
            q.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
            primitive_node(&q, g, w);
            check_node(i, w)?;
        }
        Ok(out)
    }
}

/// One harmonic on one grid level, linearized about a frozen mean.
pub struct HarmonicSystem<'a> {
    pub index: usize,
    pub omega: f64,
    pub lin: &'a Linearization<'a>,
    pub forcing: &'a [Complex64],
    pub lhs: &'a LhsSlot<Complex64>,
    pub policy: LinearPolicy,
    inverse_transforms: Vec<f64>,
    block: usize,
    anchor: Option<(Vec<Complex64>, SplitResidual<Complex64>)>,
    pub viscous_evaluations: usize,
}

impl<'a> HarmonicSystem<'a> {
    pub fn new(
        index: usize,
        omega: f64,
        physics: &Physics,
        mean: &[f64],
        lin: &'a Linearization<'a>,
        forcing: &'a [Complex64],
        lhs: &'a LhsSlot<Complex64>,
        policy: LinearPolicy,
    ) -> Self {
        let b = physics.block();
        let mut inverse_transforms = vec![0.0; mean.len() * b];
        for (w, m) in mean.chunks(b).zip(inverse_transforms.chunks_mut(b * b)) {
            inverse_transform_node(w, physics.gamma(), m);
        }
        Self { index, omega, lin, forcing, lhs, policy, inverse_transforms, block: b, anchor: None, viscous_evaluations: 0 }
    }
}

impl StageSystem for HarmonicSystem<'_> {
    type Value = Complex64;

    fn label(&self) -> String {
        format!("harmonic {}", self.index)
    }

    /// The first evaluation is anchored; later ones add the homogeneous
    /// response to the change from the anchor, so differencing noise scales
    /// with the increment rather than the whole field.
    fn evaluate(&mut self, state: &[Complex64], viscous: bool) -> Result<(Vec<Complex64>, Option<Vec<Complex64>>)> {
        let r = match &self.anchor {
            None => {
                let r = self.lin.residual(self.omega, state, self.forcing)?;
                self.anchor = Some((state.to_vec(), r.clone()));
                r
            }
            Some((base, at_base)) => {
                let delta: Vec<Complex64> = state.iter().zip(base).map(|(a, b)| a - b).collect();
                let zero = vec![Complex64::default(); self.forcing.len()];
                let d = self.lin.residual(self.omega, &delta, &zero)?;
                let add = |x: &[Complex64], y: Vec<Complex64>| x.iter().zip(y).map(|(p, q)| p + q).collect::<Vec<_>>();
                SplitResidual { inviscid: add(&at_base.inviscid, d.inviscid), viscous: add(&at_base.viscous, d.viscous) }
            }
        };
        if viscous {
            self.viscous_evaluations += 1;
        }
        Ok((r.inviscid, viscous.then_some(r.viscous)))
    }

    fn solve(&mut self, rhs: &[Complex64]) -> Result<(Vec<Complex64>, LinearSolveReport)> {
        self.policy.solve(self.lhs, rhs)
    }

    fn advance(&self, base: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
        let b = self.block;
        let mut out = base.to_vec();
        for (i, (o, dx)) in out.chunks_mut(b).zip(x.chunks(b)).enumerate() {
            let m = &self.inverse_transforms[i * b * b..(i + 1) * b * b];
            let mut mx = vec![Complex64::default(); b];
            let mc: Vec<Complex64> = m.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            dense::gemv(b, &mc, dx, &mut mx);
            o.iter_mut().zip(&mx).for_each(|(a, d)| *a += d);
        }
        Ok(out)
    }
}
