use num_complex::Complex64;

use super::{real_signal, Linearization, Order, Physics};
use crate::error::{Error, Result};
use crate::model::{common_base_omega, Mesh};
use crate::state::{reconstruct_instantaneous, HarmonicField, PrimitiveState};

/// Time-averaged nonlinear flux carried by the harmonics, stamped with the
/// iterations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicFlux {
    pub values: Vec<f64>,
    pub iteration: usize,
    pub harmonic_iteration: usize,
}

/// Sample count and base period for averaging over one common period.
/// Zero frequencies contribute constant offsets and do not set the period.
pub fn quadrature_samples(omegas: &[f64]) -> Result<(usize, f64)> {
    let nonzero: Vec<f64> = omegas.iter().copied().filter(|w| *w > 0.0).collect();
    match common_base_omega(&nonzero)? {
        None => Ok((1, 0.0)),
        Some(base) => {
            let lmax = nonzero.iter().map(|w| (w / base).round() as usize).max().unwrap_or(1);
            Ok((4 * lmax + 2, 2.0 * std::f64::consts::PI / base))
        }
    }
}

/// Average of the second-order inviscid residual over one period of the
/// reconstructed flow, minus the inviscid residual of the mean. Evaluated by
/// sampling even when the model is linear.
pub fn sampled_flux_average(
    physics: &Physics,
    mesh: &Mesh,
    mean: &PrimitiveState,
    harmonics: &[HarmonicField],
    forcings: &[Vec<Complex64>],
) -> Result<Vec<f64>> {
    if forcings.len() != harmonics.len() {
        return Err(Error::Shape(format!("{} forcings for {} harmonics", forcings.len(), harmonics.len())));
    }
    let lin = Linearization::new(physics, mesh, mean.values(), Order::Second)?;
    let base = lin.mean_boundary().to_vec();
    let steady = physics.residual(mesh, mean.values(), &base, Order::Second)?.inviscid;
    if harmonics.is_empty() {
        return Ok(vec![0.0; steady.len()]);
    }
    let bhat: Vec<Vec<Complex64>> =
        harmonics.iter().zip(forcings).map(|(h, f)| lin.harmonic_boundary(h.values(), f)).collect();
    let omegas: Vec<f64> = harmonics.iter().map(|h| h.omega).collect();
    let (samples, period) = quadrature_samples(&omegas)?;
    let refs: Vec<&[Complex64]> = bhat.iter().map(Vec::as_slice).collect();
    let mut acc = vec![0.0; steady.len()];
    let mut bnd = vec![0.0; base.len()];
    for q in 0..samples {
        let t = period * q as f64 / samples as f64;
        let w = reconstruct_instantaneous(mean, harmonics, t)?;
        real_signal(&refs, &omegas, t, &mut bnd);
        bnd.iter_mut().zip(&base).for_each(|(b, m)| *b += m);
        let r = physics.residual(mesh, w.values(), &bnd, Order::Second)?;
        acc.iter_mut().zip(&r.inviscid).for_each(|(a, v)| *a += v);
    }
    Ok(acc.iter().zip(&steady).map(|(a, s)| a / samples as f64 - s).collect())
}

/// Deterministic flux; identically zero for linear models.
pub fn deterministic_flux(
    physics: &Physics,
    mesh: &Mesh,
    mean: &PrimitiveState,
    harmonics: &[HarmonicField],
    forcings: &[Vec<Complex64>],
) -> Result<Vec<f64>> {
    if physics.is_linear() {
        return Ok(vec![0.0; mean.values().len()]);
    }
    sampled_flux_average(physics, mesh, mean, harmonics, forcings)
}
