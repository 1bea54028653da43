//! Case definitions: gas, harmonic forcing, meshes and the two model problems.

mod config;
mod exact;
mod mesh;
mod nozzle;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use config::{CaseConfig, CaseKind, DissipationParams, Mode, NozzleParams, ScalarParams, SchemeConfig};
pub use exact::advdiff_exact_harmonic;
pub use mesh::{build_mesh, BoundaryMarker, Face, FaceNeighbor, Mesh};
pub use nozzle::{isentropic_state, nozzle_steady_reference};

/// Ideal gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
    gas_constant: f64,
}

impl GasModel {
    pub fn new(gamma: f64, gas_constant: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(gas_constant > 0.0) || !gas_constant.is_finite() {
            return Err(Error::Config(format!("gas constant must be positive, got {gas_constant}")));
        }
        Ok(Self { gamma, gas_constant })
    }

    pub fn air() -> Self {
        Self { gamma: 1.4, gas_constant: 287.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gas_constant(&self) -> f64 {
        self.gas_constant
    }

    pub fn cp(&self) -> f64 {
        self.gamma * self.gas_constant / (self.gamma - 1.0)
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

/// One retained harmonic with its boundary forcing, given relative to the
/// case's forcing scale. The layout of `inlet`/`outlet` depends on the case.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicEntry {
    pub index: usize,
    pub omega: f64,
    pub inlet: Vec<Complex64>,
    pub outlet: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpec {
    entries: Vec<HarmonicEntry>,
}

impl HarmonicSpec {
    pub fn new(entries: Vec<HarmonicEntry>) -> Result<Self> {
        for (k, e) in entries.iter().enumerate() {
            if !(e.omega >= 0.0) || !e.omega.is_finite() {
                return Err(Error::Config(format!("harmonic {} has invalid angular frequency {}", e.index, e.omega)));
            }
            if entries[..k].iter().any(|o| o.index == e.index) {
                return Err(Error::Config(format!("harmonic index {} repeated", e.index)));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[HarmonicEntry] {
        &self.entries
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.omega).collect()
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self { entries: self.entries.iter().take(n).cloned().collect() }
    }
}

/// Smallest angular frequency of which every nonzero `omega` is an integer
/// multiple, searched as `min / k` for small `k`.
pub fn common_base_omega(omegas: &[f64]) -> Result<Option<f64>> {
    let nonzero: Vec<f64> = omegas.iter().copied().filter(|w| *w > 0.0).collect();
    let Some(min) = nonzero.iter().copied().reduce(f64::min) else {
        return Ok(None);
    };
    for k in 1..=64 {
        let base = min / k as f64;
        if nonzero.iter().all(|w| {
            let m = w / base;
            (m - m.round()).abs() <= 1e-9 * m.max(1.0)
        }) {
            return Ok(Some(base));
        }
    }
    Err(Error::Config(format!("harmonic frequencies {nonzero:?} share no common period")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gas_requires_gamma_above_one() {
        assert!(GasModel::new(1.0, 287.0).is_err());
        assert!(GasModel::new(1.4, 287.0).is_ok());
    }

    #[test]
    fn base_frequency_of_multiples() {
        let b = common_base_omega(&[2.0, 4.0, 6.0]).unwrap().unwrap();
        assert!((b - 2.0).abs() < 1e-15);
        let b = common_base_omega(&[4.0, 6.0]).unwrap().unwrap();
        assert!((b - 2.0).abs() < 1e-15);
        assert_eq!(common_base_omega(&[0.0]).unwrap(), None);
        assert!(common_base_omega(&[1.0, std::f64::consts::SQRT_2]).is_err());
    }

    #[test]
    fn repeated_index_rejected() {
        let e = HarmonicEntry { index: 1, omega: 1.0, inlet: vec![], outlet: vec![] };
        assert!(HarmonicSpec::new(vec![e.clone(), e]).is_err());
    }
}
