//! One-dimensional characteristic boundary treatment.
//!
//! For a perturbation `(drho, du, dp)` about a state with density `rho` and
//! sound speed `c`, the characteristic amplitudes are
//! `c1 = drho - dp/c^2` (entropy), `c3 = dp + rho c du` (downstream acoustic)
//! and `c4 = dp - rho c du` (upstream acoustic).

use super::EulerModel;
use crate::error::{Error, Result};

pub fn characteristics(state: &[f64], gamma: f64, d: &[f64]) -> [f64; 3] {
    let (rho, p) = (state[0], state[2]);
    let c = (gamma * p / rho).sqrt();
    let z = rho * c;
    [d[0] - d[2] / (c * c), d[2] + z * d[1], d[2] - z * d[1]]
}

pub fn from_characteristics(state: &[f64], gamma: f64, ch: [f64; 3]) -> [f64; 3] {
    let (rho, p) = (state[0], state[2]);
    let c = (gamma * p / rho).sqrt();
    let z = rho * c;
    let dp = 0.5 * (ch[1] + ch[2]);
    let du = 0.5 * (ch[1] - ch[2]) / z;
    [ch[0] + dp / (c * c), du, dp]
}

/// Subsonic inflow at fixed total pressure and temperature, keeping the
/// outgoing Riemann invariant `u - 2c/(gamma-1)` of the interior node.
pub fn inlet_state(m: &EulerModel, interior: &[f64]) -> Result<[f64; 3]> {
    let g = m.gamma;
    let (rho, u, p) = (interior[0], interior[1], interior[2]);
    let c = (g * p / rho).sqrt();
    let gm = 0.5 * (g - 1.0);
    let riemann = u - c / gm;
    let c0_sq = g * m.gas_constant * m.total_temperature;
    // (gm^2 + gm) ub^2 - 2 gm^2 J ub + gm^2 J^2 - c0^2 = 0
    let qa = gm * gm + gm;
    let qb = -2.0 * gm * gm * riemann;
    let qc = gm * gm * riemann * riemann - c0_sq;
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc >= 0.0) {
        return Err(Error::Unsupported(format!("inlet has no subsonic state for interior {interior:?}")));
    }
    let ub = (-qb + disc.sqrt()) / (2.0 * qa);
    let cb = gm * (ub - riemann);
    if !(cb > 0.0) || ub.abs() >= cb {
        return Err(Error::Unsupported(format!("inlet state is not subsonic (u = {ub}, c = {cb})")));
    }
    let tb = cb * cb / (g * m.gas_constant);
    let pb = m.total_pressure * (tb / m.total_temperature).powf(g / (g - 1.0));
    Ok([pb / (m.gas_constant * tb), ub, pb])
}

/// Subsonic outflow at fixed static pressure; entropy and downstream
/// acoustic characteristics come from the interior node.
pub fn outlet_state(m: &EulerModel, interior: &[f64]) -> [f64; 3] {
    let (rho, u, p) = (interior[0], interior[1], interior[2]);
    let c = (m.gamma * p / rho).sqrt();
    let dp = m.outlet_pressure - p;
    [rho + dp / (c * c), u - dp / (rho * c), m.outlet_pressure]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{isentropic_state, GasModel};

    fn model() -> EulerModel {
        EulerModel {
            gamma: 1.4,
            gas_constant: 287.0,
            k2: 0.5,
            k4: 1.0 / 32.0,
            total_pressure: 101_325.0,
            total_temperature: 300.0,
            outlet_pressure: 90_000.0,
        }
    }

    #[test]
    fn inlet_reproduces_isentropic_interior() {
        let m = model();
        let w = isentropic_state(&GasModel::air(), 101_325.0, 300.0, 95_000.0).unwrap();
        let b = inlet_state(&m, &w).unwrap();
        for k in 0..3 {
            assert!((b[k] - w[k]).abs() <= 1e-10 * w[k].abs().max(1.0), "{b:?} vs {w:?}");
        }
    }

    #[test]
    fn characteristic_roundtrip() {
        let s = [1.1, 80.0, 9e4];
        let d = [0.01, -2.0, 300.0];
        let back = from_characteristics(&s, 1.4, characteristics(&s, 1.4, &d));
        for k in 0..3 {
            assert!((back[k] - d[k]).abs() < 1e-12 * d[k].abs().max(1.0));
        }
    }

    #[test]
    fn raising_back_pressure_moves_only_upstream_characteristic() {
        let mut m = model();
        let interior = [1.1, 120.0, 91_000.0];
        let before = outlet_state(&m, &interior);
        m.outlet_pressure += 50.0;
        let after = outlet_state(&m, &interior);
        let d: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
        let ch = characteristics(&interior, 1.4, &d);
        assert!(ch[0].abs() < 1e-12);
        assert!(ch[1].abs() < 1e-9);
        assert!((ch[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_strong_inflow_rejected() {
        let m = model();
        assert!(inlet_state(&m, &[1.0, -2000.0, 1e5]).is_err());
    }
}
