use super::config::{CaseConfig, CaseKind};
use super::GasModel;
use crate::error::{Error, Result};
use crate::state::PrimitiveState;

/// `(rho, u, p)` reached by isentropic expansion from total conditions to
/// static pressure `p`.
pub fn isentropic_state(gas: &GasModel, total_pressure: f64, total_temperature: f64, p: f64) -> Result<[f64; 3]> {
    if p > total_pressure {
        return Err(Error::Unsupported(format!(
            "static pressure {p} exceeds total pressure {total_pressure}; reverse flow is not modelled"
        )));
    }
    let g = gas.gamma();
    let ratio = (total_pressure / p).powf((g - 1.0) / g);
    let mach2 = 2.0 / (g - 1.0) * (ratio - 1.0);
    if mach2 >= 1.0 {
        return Err(Error::Unsupported(format!("boundary data give Mach {:.3}; only subsonic flow is supported", mach2.sqrt())));
    }
    let t = total_temperature / ratio;
    let rho = p / (gas.gas_constant() * t);
    let u = mach2.max(0.0).sqrt() * (g * gas.gas_constant() * t).sqrt();
    Ok([rho, u, p])
}

/// Uniform initial guess: the outlet static pressure with the isentropic
/// velocity it implies.
pub fn nozzle_steady_reference(config: &CaseConfig) -> Result<PrimitiveState> {
    if config.kind != CaseKind::NozzleEuler {
        return Err(Error::Config(format!("{} has no nozzle reference state", config.kind)));
    }
    let n = &config.nozzle;
    let w = isentropic_state(&config.gas, n.inlet_total_pressure, n.inlet_total_temperature, n.outlet_pressure)?;
    PrimitiveState::new(3, w.repeat(config.nx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_subsonic_and_bounded() {
        let c = CaseConfig::nozzle(16, 0);
        let w = nozzle_steady_reference(&c).unwrap();
        for node in w.nodes() {
            assert!(node[0] > 0.0 && node[2] > 0.0);
            assert!((90_000.0..=101_325.0).contains(&node[2]));
            let c = (1.4 * node[2] / node[0]).sqrt();
            assert!(node[1] > 0.0 && node[1] < c);
        }
    }

    #[test]
    fn equal_pressures_give_rest() {
        let c = CaseConfig::parse("kind = nozzle-euler\nnx = 8\noutlet_pressure = 101325\n").unwrap();
        let w = nozzle_steady_reference(&c).unwrap();
        assert!(w.nodes().all(|n| n[1] == 0.0));
    }

    #[test]
    fn supersonic_data_unsupported() {
        let c = CaseConfig::parse("kind = nozzle-euler\nnx = 8\noutlet_pressure = 40000\n").unwrap();
        assert!(matches!(nozzle_steady_reference(&c), Err(Error::Unsupported(_))));
    }
}
