use num_complex::Complex64;

use super::{Order, Physics, SplitResidual};
use crate::error::{Error, Result};
use crate::model::{HarmonicSpec, Mesh};
use crate::state::{transform_node, HarmonicField, PrimitiveState};

const STEP: f64 = 3e-4;

/// Linearization of the second-order residual about a fixed mean state.
#[derive(Debug, Clone)]
pub struct Linearization<'a> {
    physics: &'a Physics,
    mesh: &'a Mesh,
    mean: &'a [f64],
    mean_bnd: Vec<f64>,
    scales: Vec<f64>,
    transforms: Vec<f64>,
    order: Order,
}

impl<'a> Linearization<'a> {
    pub fn new(physics: &'a Physics, mesh: &'a Mesh, mean: &'a [f64], order: Order) -> Result<Self> {
        let b = physics.block();
        let mean_bnd = physics.mean_boundary(mesh, mean)?;
        let mut transforms = vec![0.0; mesh.n_nodes() * b * b];
        for (w, m) in mean.chunks(b).zip(transforms.chunks_mut(b * b)) {
            transform_node(w, physics.gamma(), m);
        }
        Ok(Self { physics, mesh, mean, mean_bnd, scales: physics.variable_scales(mean), transforms, order })
    }

    pub fn mean_boundary(&self) -> &[f64] {
        &self.mean_bnd
    }

    pub fn boundary(&self, dw: &[f64], forcing: &[f64]) -> Vec<f64> {
        self.physics.perturbation_boundary(self.mesh, self.mean, dw, forcing)
    }

    /// Directional derivative of the residual along `(dw, dbnd)`.
    pub fn directional(&self, dw: &[f64], dbnd: &[f64]) -> Result<SplitResidual<f64>> {
        if self.physics.is_linear() {
            return self.physics.residual(self.mesh, dw, dbnd, self.order);
        }
        let b = self.physics.block();
        let ratio = |(k, v): (usize, &f64)| v.abs() / self.scales[k % b];
        let size = dw.iter().enumerate().map(ratio).chain(dbnd.iter().enumerate().map(ratio)).fold(0.0, f64::max);
        if size == 0.0 {
            return Ok(SplitResidual::zeros(dw.len()));
        }
        let h = STEP / size;
        let shift = |base: &[f64], d: &[f64], s: f64| base.iter().zip(d).map(|(x, y)| x + s * y).collect::<Vec<_>>();
        let at = |s: f64| self.physics.residual(self.mesh, &shift(self.mean, dw, s * h), &shift(&self.mean_bnd, dbnd, s * h), self.order);
        let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
        let diff = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| {
            a.iter().zip(b).zip(c).zip(d).map(|(((p1, m1), p2), m2)| (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)).collect()
        };
        Ok(SplitResidual {
            inviscid: diff(&p1.inviscid, &m1.inviscid, &p2.inviscid, &m2.inviscid),
            viscous: diff(&p1.viscous, &m1.viscous, &p2.viscous, &m2.viscous),
        })
    }

    /// Complex boundary perturbation of a harmonic.
    pub fn harmonic_boundary(&self, what: &[Complex64], forcing: &[Complex64]) -> Vec<Complex64> {
        let re = self.boundary(&parts(what, |z| z.re), &parts(forcing, |z| z.re));
        let im = self.boundary(&parts(what, |z| z.im), &parts(forcing, |z| z.im));
        re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    /// `i omega V M what + dR[what]`, the spectral term in the inviscid part.
    pub fn residual(&self, omega: f64, what: &[Complex64], forcing: &[Complex64]) -> Result<SplitResidual<Complex64>> {
        let b = self.physics.block();
        let (wr, wi) = (parts(what, |z| z.re), parts(what, |z| z.im));
        let (fr, fi) = (parts(forcing, |z| z.re), parts(forcing, |z| z.im));
        let dr = self.directional(&wr, &self.boundary(&wr, &fr))?;
        let di = self.directional(&wi, &self.boundary(&wi, &fi))?;
        let join = |a: Vec<f64>, c: Vec<f64>| a.into_iter().zip(c).map(|(x, y)| Complex64::new(x, y)).collect::<Vec<_>>();
        let mut inviscid = join(dr.inviscid, di.inviscid);
        let viscous = join(dr.viscous, di.viscous);
        if omega != 0.0 {
            for i in 0..self.mesh.n_nodes() {
                let s = Complex64::new(0.0, omega * self.mesh.volume(i));
                let m = &self.transforms[i * b * b..(i + 1) * b * b];
                for r in 0..b {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..b {
                        acc += m[r * b + c] * what[i * b + c];
                    }
                    inviscid[i * b + r] += s * acc;
                }
            }
        }
        Ok(SplitResidual { inviscid, viscous })
    }
}

fn parts(v: &[Complex64], f: impl Fn(&Complex64) -> f64) -> Vec<f64> {
    v.iter().map(f).collect()
}

/// Time-linearized residual of one harmonic about `mean`, forced by the
/// boundary data of the matching entry in `spec`.
pub fn linearized_residual(
    physics: &Physics,
    mesh: &Mesh,
    spec: &HarmonicSpec,
    forcing_amplitude: f64,
    mean: &PrimitiveState,
    harmonic: &HarmonicField,
) -> Result<SplitResidual<Complex64>> {
    let entry = spec
        .entries()
        .iter()
        .find(|e| e.index == harmonic.index && e.omega == harmonic.omega)
        .ok_or_else(|| {
            Error::Config(format!(
                "harmonic {} at frequency {} is not in the harmonic set",
                harmonic.index, harmonic.omega
            ))
        })?;
    if harmonic.values().len() != mean.values().len() {
        return Err(Error::Shape("harmonic and mean sizes differ".into()));
    }
    let lin = Linearization::new(physics, mesh, mean.values(), Order::Second)?;
    let forcing = physics.harmonic_forcing(mesh, entry, forcing_amplitude);
    lin.residual(harmonic.omega, harmonic.values(), &forcing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, nozzle_steady_reference, CaseConfig};
    use proptest::prelude::*;

    fn nozzle() -> (CaseConfig, Mesh, Physics, PrimitiveState) {
        let cfg = CaseConfig::nozzle(12, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let mut w = nozzle_steady_reference(&cfg).unwrap();
        for (i, v) in w.values_mut().iter_mut().enumerate() {
            *v *= 1.0 + 0.02 * (i as f64 * 0.3).sin();
        }
        (cfg, mesh, phys, w)
    }

    #[test]
    fn unknown_frequency_rejected() {
        let (cfg, mesh, phys, w) = nozzle();
        let h = HarmonicField::zeros(1, 17.0, 12, 3);
        let r = linearized_residual(&phys, &mesh, &cfg.harmonics, 1e-3, &w, &h);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn spectral_term_scales_with_frequency() {
        let (_, mesh, phys, w) = nozzle();
        let lin = Linearization::new(&phys, &mesh, w.values(), Order::Second).unwrap();
        let what: Vec<Complex64> = (0..36).map(|i| Complex64::new(1e-3 * i as f64, 0.5)).collect();
        let zero = [Complex64::default(); 3];
        let a = lin.residual(0.0, &what, &zero).unwrap().total();
        let b = lin.residual(10.0, &what, &zero).unwrap().total();
        let c = lin.residual(20.0, &what, &zero).unwrap().total();
        for i in 0..36 {
            let d1 = b[i] - a[i];
            let d2 = c[i] - a[i];
            assert!((d2 - 2.0 * d1).norm() <= 1e-9 * d2.norm().max(1e-12));
        }
    }

    #[test]
    fn scalar_directional_derivative_is_exact() {
        let cfg = CaseConfig::scalar(8, 4, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let mean = vec![1.0; 32];
        let lin = Linearization::new(&phys, &mesh, &mean, Order::Second).unwrap();
        let dw: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let f = vec![0.3; 4];
        let bnd = lin.boundary(&dw, &f);
        let d = lin.directional(&dw, &bnd).unwrap();
        let r = phys.residual(&mesh, &dw, &bnd, Order::Second).unwrap();
        assert_eq!(d, r);
    }

    proptest! {
        #[test]
        fn nozzle_linearization_is_complex_linear(
            ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0, seed in 0u64..1000
        ) {
            let (_, mesh, phys, w) = nozzle();
            let lin = Linearization::new(&phys, &mesh, w.values(), Order::Second).unwrap();
            let scale = [1e-3, 0.1, 100.0];
            let field = |s: u64| -> Vec<Complex64> {
                (0..36).map(|i| {
                    let t = (i as f64 + 1.0) * (s as f64 + 1.3);
                    Complex64::new(t.sin(), (0.7 * t).cos()) * scale[i % 3]
                }).collect()
            };
            let (x, y) = (field(seed), field(seed + 7));
            let fx = [Complex64::new(1e-3, 0.0), Complex64::new(0.0, 50.0), Complex64::new(20.0, -10.0)];
            let fy = [Complex64::new(0.0, 2e-3), Complex64::new(30.0, 0.0), Complex64::new(-5.0, 5.0)];
            let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let comb: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let fcomb: Vec<Complex64> = fx.iter().zip(&fy).map(|(p, q)| a * p + b * q).collect();
            let omega = 2.0 * std::f64::consts::PI * 200.0;
            let lhs = lin.residual(omega, &comb, &fcomb).unwrap().total();
            let rx = lin.residual(omega, &x, &fx).unwrap().total();
            let ry = lin.residual(omega, &y, &fy).unwrap().total();
            let rhs: Vec<Complex64> = rx.iter().zip(&ry).map(|(p, q)| a * p + b * q).collect();
            let num: f64 = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = rhs.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt()
                + rx.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt() * (ar.abs() + ai.abs())
                + ry.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt() * (br.abs() + bi.abs());
            prop_assert!(num <= 1e-8 * den, "{} vs {}", num, den);
        }
    }
}
