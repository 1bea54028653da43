use num_complex::Complex64;

use crate::error::{Error, Result};

/// Closed-form harmonic amplitude of `u_t + a u_x = nu (u_xx + u_yy)` forced
/// by `u(0, y) = exp(i sigma y)`, taking the spatially decaying branch.
pub fn advdiff_exact_harmonic(x: f64, y: f64, omega: f64, a: f64, nu: f64, sigma: f64) -> Result<Complex64> {
    if !(a > 0.0) || !(nu >= 0.0) {
        return Err(Error::Config(format!("exact solution needs a > 0 and nu >= 0 (a = {a}, nu = {nu})")));
    }
    let c = Complex64::new(nu * sigma * sigma, omega);
    // root of nu L^2 - a L - c = 0 written without cancellation; reduces to -c/a at nu = 0
    let disc = (Complex64::new(a * a, 0.0) + 4.0 * nu * c).sqrt();
    let lambda = -2.0 * c / (a + disc);
    if lambda.re > 1e-14 * lambda.norm() {
        return Err(Error::Unsupported(format!("no decaying root for omega = {omega}")));
    }
    Ok(Complex64::new(0.0, sigma * y).exp() * (lambda * x).exp())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn full_period_advection_delay() {
        let u = advdiff_exact_harmonic(1.0, 0.0, 2.0 * PI, 1.0, 0.0, 0.0).unwrap();
        assert!((u - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quarter_period_lag() {
        let u = advdiff_exact_harmonic(1.0, 0.0, PI, 2.0, 0.0, 0.0).unwrap();
        assert!((u - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn decaying_root_solves_dispersion_relation() {
        let (omega, a, nu) = (2.0 * PI, 1.0, 0.01);
        let x = 0.3;
        let u = advdiff_exact_harmonic(x, 0.0, omega, a, nu, 0.0).unwrap();
        let lambda = u.ln() / x;
        let res = nu * lambda * lambda - a * lambda - Complex64::new(0.0, omega);
        assert!(res.norm() < 1e-12);
        assert!(lambda.re < 0.0);
    }

    #[test]
    fn rejects_non_positive_speed() {
        assert!(advdiff_exact_harmonic(0.0, 0.0, 1.0, 0.0, 0.1, 0.0).is_err());
    }
}
