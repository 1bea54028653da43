//! Steady residuals, their first-order Jacobian, the time-linearized residual
//! of a harmonic and the deterministic flux that couples harmonics back into
//! the mean flow.
//!
//! Every residual takes the boundary states explicitly (inlet faces first,
//! then outlet faces, `block` values each). Mean-flow solves obtain them from
//! [`Physics::mean_boundary`]; harmonic solves perturb them with the linear
//! characteristic map in [`Physics::perturbation_boundary`].

mod boundary;
mod df;
mod euler;
mod jacobian;
mod linearized;
mod scalar;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CaseConfig, CaseKind, HarmonicEntry, Mesh};
use crate::sparse::Scalar;
use crate::state::PrimitiveState;

pub use boundary::{characteristics, from_characteristics, inlet_state, outlet_state};
pub use df::{deterministic_flux, quadrature_samples, sampled_flux_average, DeterministicFlux};
pub use euler::{euler_flux, euler_flux_jacobian};
pub use jacobian::{assemble_jacobian, assemble_jacobian_into, build_pattern, to_conservative_columns};
pub use linearized::{linearized_residual, Linearization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Immediate-neighbour stencil with first-difference dissipation.
    First,
    /// Pressure-switched second/fourth difference dissipation.
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResidual<T> {
    pub inviscid: Vec<T>,
    pub viscous: Vec<T>,
}

impl<T: Scalar> SplitResidual<T> {
    pub fn zeros(len: usize) -> Self {
        Self { inviscid: vec![T::zero(); len], viscous: vec![T::zero(); len] }
    }

    pub fn total(&self) -> Vec<T> {
        self.inviscid.iter().zip(&self.viscous).map(|(a, b)| *a + *b).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerModel {
    pub gamma: f64,
    pub gas_constant: f64,
    pub k2: f64,
    pub k4: f64,
    pub total_pressure: f64,
    pub total_temperature: f64,
    pub outlet_pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarModel {
    pub speed: f64,
    pub diffusivity: f64,
    pub k4: f64,
    pub inlet_value: f64,
    pub wavenumber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Physics {
    Euler(EulerModel),
    Scalar(ScalarModel),
}

const EULER_NAMES: [&str; 3] = ["rho", "u", "p"];
const SCALAR_NAMES: [&str; 1] = ["phi"];

impl Physics {
    pub fn from_config(cfg: &CaseConfig) -> Self {
        match cfg.kind {
            CaseKind::NozzleEuler => Physics::Euler(EulerModel {
                gamma: cfg.gas.gamma(),
                gas_constant: cfg.gas.gas_constant(),
                k2: cfg.dissipation.k2,
                k4: cfg.dissipation.k4,
                total_pressure: cfg.nozzle.inlet_total_pressure,
                total_temperature: cfg.nozzle.inlet_total_temperature,
                outlet_pressure: cfg.nozzle.outlet_pressure,
            }),
            _ => Physics::Scalar(ScalarModel {
                speed: cfg.scalar.advection_speed,
                diffusivity: cfg.scalar.diffusivity,
                k4: cfg.dissipation.k4,
                inlet_value: cfg.scalar.inlet_value,
                wavenumber: cfg.scalar.transverse_wavenumber,
            }),
        }
    }

    pub fn block(&self) -> usize {
        match self {
            Physics::Euler(_) => 3,
            Physics::Scalar(_) => 1,
        }
    }

    /// Ratio of specific heats used by the state transforms (unused by the
    /// scalar model, whose transforms are the identity).
    pub fn gamma(&self) -> f64 {
        match self {
            Physics::Euler(m) => m.gamma,
            Physics::Scalar(_) => 1.4,
        }
    }

    /// True when the residual is linear and homogeneous in the state and the
    /// boundary values together.
    pub fn is_linear(&self) -> bool {
        matches!(self, Physics::Scalar(_))
    }

    pub fn variable_names(&self) -> &'static [&'static str] {
        match self {
            Physics::Euler(_) => &EULER_NAMES,
            Physics::Scalar(_) => &SCALAR_NAMES,
        }
    }

    pub fn boundary_len(&self, mesh: &Mesh) -> usize {
        2 * mesh.ny() * self.block()
    }

    pub fn residual(&self, mesh: &Mesh, w: &[f64], bnd: &[f64], order: Order) -> Result<SplitResidual<f64>> {
        let b = self.block();
        if w.len() != mesh.n_nodes() * b || bnd.len() != self.boundary_len(mesh) {
            return Err(Error::Shape(format!(
                "residual needs {} state and {} boundary values, got {} and {}",
                mesh.n_nodes() * b,
                self.boundary_len(mesh),
                w.len(),
                bnd.len()
            )));
        }
        match self {
            Physics::Euler(m) => {
                let inviscid = euler::residual(m, mesh, w, bnd, order)?;
                let viscous = vec![0.0; inviscid.len()];
                Ok(SplitResidual { inviscid, viscous })
            }
            Physics::Scalar(m) => Ok(scalar::residual(m, mesh, w, bnd, order)),
        }
    }

    /// Boundary states implied by the interior mean flow.
    pub fn mean_boundary(&self, mesh: &Mesh, w: &[f64]) -> Result<Vec<f64>> {
        match self {
            Physics::Euler(m) => {
                let n = mesh.nx();
                let inlet = inlet_state(m, &w[0..3])?;
                let outlet = outlet_state(m, &w[3 * (n - 1)..3 * n]);
                Ok(inlet.into_iter().chain(outlet).collect())
            }
            Physics::Scalar(m) => {
                let mut bnd = vec![m.inlet_value; mesh.ny()];
                bnd.extend(mesh.outlet_nodes().map(|i| w[i]));
                Ok(bnd)
            }
        }
    }

    /// Boundary-state perturbation for an interior perturbation `dw` about the
    /// mean `w`, with the incoming characteristics set by `forcing`.
    /// Real-linear in `(dw, forcing)`.
    pub fn perturbation_boundary(&self, mesh: &Mesh, w: &[f64], dw: &[f64], forcing: &[f64]) -> Vec<f64> {
        match self {
            Physics::Euler(m) => {
                let n = mesh.nx();
                let (w_in, w_out) = (&w[0..3], &w[3 * (n - 1)..3 * n]);
                let out_in = characteristics(w_in, m.gamma, &dw[0..3])[2];
                let inlet = from_characteristics(w_in, m.gamma, [forcing[0], 2.0 * forcing[1], out_in]);
                let ch = characteristics(w_out, m.gamma, &dw[3 * (n - 1)..3 * n]);
                let outlet = from_characteristics(w_out, m.gamma, [ch[0], ch[1], 2.0 * forcing[2]]);
                inlet.into_iter().chain(outlet).collect()
            }
            Physics::Scalar(_) => {
                let mut bnd = forcing.to_vec();
                bnd.extend(mesh.outlet_nodes().map(|i| dw[i]));
                bnd
            }
        }
    }

    pub fn forcing_len(&self, mesh: &Mesh) -> usize {
        match self {
            Physics::Euler(_) => 3,
            Physics::Scalar(_) => mesh.ny(),
        }
    }

    /// Absolute complex forcing of one harmonic on `mesh`.
    ///
    /// Nozzle layout: inlet entropy density, inlet acoustic pressure, outlet
    /// acoustic pressure. Scalar layout: inlet value per row.
    pub fn harmonic_forcing(&self, mesh: &Mesh, entry: &HarmonicEntry, amplitude: f64) -> Vec<Complex64> {
        match self {
            Physics::Euler(m) => {
                let rho0 = m.total_pressure / (m.gas_constant * m.total_temperature);
                let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or_default();
                vec![
                    amplitude * rho0 * get(&entry.inlet, 0),
                    amplitude * m.total_pressure * get(&entry.inlet, 1),
                    amplitude * m.outlet_pressure * get(&entry.outlet, 0),
                ]
            }
            Physics::Scalar(m) => {
                let f = entry.inlet.first().copied().unwrap_or_default();
                (0..mesh.ny())
                    .map(|iy| {
                        let y = mesh.coord(mesh.node(0, iy))[1];
                        amplitude * f * Complex64::new(0.0, m.wavenumber * y).exp()
                    })
                    .collect()
            }
        }
    }

    /// Slowest streamwise convection speed of the mean state.
    pub fn slowest_convection(&self, w: &[f64]) -> f64 {
        match self {
            Physics::Euler(_) => w.chunks(3).map(|x| x[1].abs()).fold(f64::INFINITY, f64::min),
            Physics::Scalar(m) => m.speed.abs(),
        }
    }

    /// Per-variable magnitudes used to size finite-difference steps.
    pub fn variable_scales(&self, w: &[f64]) -> Vec<f64> {
        let b = self.block();
        let n = (w.len() / b).max(1) as f64;
        let rms = |v: usize| (w.iter().skip(v).step_by(b).map(|x| x * x).sum::<f64>() / n).sqrt();
        match self {
            Physics::Euler(m) => {
                let c2 = w.chunks(3).map(|x| m.gamma * x[2] / x[0]).sum::<f64>() / n;
                vec![rms(0), rms(1) + c2.sqrt(), rms(2)]
            }
            Physics::Scalar(_) => vec![rms(0).max(1.0)],
        }
    }
}

/// Nonlinear residual of a mean state with its own boundary states; `df`,
/// when given, is added to the inviscid part.
pub fn nonlinear_residual(
    physics: &Physics,
    mesh: &Mesh,
    w: &PrimitiveState,
    df: Option<&[f64]>,
) -> Result<SplitResidual<f64>> {
    let bnd = physics.mean_boundary(mesh, w.values())?;
    let mut r = physics.residual(mesh, w.values(), &bnd, Order::Second)?;
    if let Some(df) = df {
        if df.len() != r.inviscid.len() {
            return Err(Error::Shape("deterministic flux length differs from residual".into()));
        }
        r.inviscid.iter_mut().zip(df).for_each(|(r, d)| *r += d);
    }
    Ok(r)
}

/// `2 Re(sum_l v_l exp(i omega_l t))` for a set of complex vectors.
pub fn real_signal(amplitudes: &[&[Complex64]], omegas: &[f64], t: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (a, w) in amplitudes.iter().zip(omegas) {
        let phase = Complex64::new(0.0, w * t).exp();
        for (o, x) in out.iter_mut().zip(a.iter()) {
            *o += 2.0 * (x * phase).re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, nozzle_steady_reference};

    #[test]
    fn uniform_duct_flow_has_zero_residual() {
        let cfg = CaseConfig::parse("kind = nozzle-euler\nnx = 12\narea_curvature = 0\n").unwrap();
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let w = nozzle_steady_reference(&cfg).unwrap();
        let r = nonlinear_residual(&phys, &mesh, &w, None).unwrap();
        let scale = 1e5;
        assert!(r.inviscid.iter().all(|v| v.abs() < 1e-9 * scale), "{:?}", r.inviscid);
    }

    #[test]
    fn constant_df_adds_exactly() {
        let cfg = CaseConfig::nozzle(10, 0);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let w = nozzle_steady_reference(&cfg).unwrap();
        let df = vec![0.25; 30];
        let a = nonlinear_residual(&phys, &mesh, &w, Some(&df)).unwrap();
        let b = nonlinear_residual(&phys, &mesh, &w, None).unwrap();
        for (x, y) in a.inviscid.iter().zip(&b.inviscid) {
            assert_eq!(x - y, 0.25);
        }
    }

    #[test]
    fn scalar_forcing_follows_transverse_wave() {
        let cfg = CaseConfig::scalar(8, 4, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let f = phys.harmonic_forcing(&mesh, &cfg.harmonics.entries()[0], 1.0);
        assert_eq!(f.len(), 4);
        let y = mesh.coord(mesh.node(0, 1))[1];
        assert!((f[1] - Complex64::new(0.0, 2.0 * std::f64::consts::PI * y).exp()).norm() < 1e-15);
    }

    #[test]
    fn zero_forcing_gives_zero_boundary_perturbation() {
        let cfg = CaseConfig::nozzle(10, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let w = nozzle_steady_reference(&cfg).unwrap();
        let b = phys.perturbation_boundary(&mesh, w.values(), &[0.0; 30], &[0.0; 3]);
        assert!(b.iter().all(|v| *v == 0.0));
    }
}
