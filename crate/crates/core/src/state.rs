//! Flow-state containers and the primitive/conservative transforms.
//!
//! Euler nodes hold `(rho, u, p)` primitives and `(rho, rho u, rho E)`
//! conservatives; scalar nodes hold a single value for which both sets and
//! the transform Jacobian are the identity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::GasModel;

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    block: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeState {
    block: usize,
    values: Vec<f64>,
}

/// Per-node `dQ/dW` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformJacobian {
    block: usize,
    values: Vec<f64>,
}

/// Complex amplitudes of one retained harmonic; the physical signal is
/// `2 Re(values * exp(i omega t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    pub index: usize,
    pub omega: f64,
    block: usize,
    values: Vec<Complex64>,
}

fn check_layout(block: usize, len: usize) -> Result<()> {
    if block == 0 || !len.is_multiple_of(block) {
        return Err(Error::Shape(format!("{len} values do not divide into blocks of {block}")));
    }
    Ok(())
}

macro_rules! node_access {
    ($t:ty, $s:ty) => {
        impl $t {
            pub fn block(&self) -> usize {
                self.block
            }

            pub fn n_nodes(&self) -> usize {
                self.values.len() / self.block
            }

            pub fn node(&self, i: usize) -> &[$s] {
                &self.values[i * self.block..(i + 1) * self.block]
            }

            pub fn node_mut(&mut self, i: usize) -> &mut [$s] {
                &mut self.values[i * self.block..(i + 1) * self.block]
            }

            pub fn nodes(&self) -> std::slice::Chunks<'_, $s> {
                self.values.chunks(self.block)
            }

            pub fn values(&self) -> &[$s] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [$s] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<$s> {
                self.values
            }
        }
    };
}

node_access!(PrimitiveState, f64);
node_access!(ConservativeState, f64);
node_access!(HarmonicField, Complex64);

impl PrimitiveState {
    pub fn new(block: usize, values: Vec<f64>) -> Result<Self> {
        check_layout(block, values.len())?;
        Ok(Self { block, values })
    }

    pub fn uniform(n: usize, node: &[f64]) -> Self {
        Self { block: node.len(), values: node.repeat(n) }
    }

    /// Positivity of density and pressure for Euler nodes; finiteness always.
    pub fn check_admissible(&self) -> Result<()> {
        for (i, w) in self.nodes().enumerate() {
            check_node(i, w)?;
        }
        Ok(())
    }
}

impl ConservativeState {
    pub fn new(block: usize, values: Vec<f64>) -> Result<Self> {
        check_layout(block, values.len())?;
        Ok(Self { block, values })
    }
}

impl TransformJacobian {
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let bl = self.block * self.block;
        &self.values[i * bl..(i + 1) * bl]
    }
}

impl HarmonicField {
    pub fn new(index: usize, omega: f64, block: usize, values: Vec<Complex64>) -> Result<Self> {
        check_layout(block, values.len())?;
        Ok(Self { index, omega, block, values })
    }

    pub fn zeros(index: usize, omega: f64, n: usize, block: usize) -> Self {
        Self { index, omega, block, values: vec![Complex64::new(0.0, 0.0); n * block] }
    }
}

pub(crate) fn check_node(i: usize, w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::State { node: i, reason: "non-finite value".into() });
    }
    if w.len() == 3 {
        if !(w[0] > 0.0) {
            return Err(Error::State { node: i, reason: format!("density {} is not positive", w[0]) });
        }
        if !(w[2] > 0.0) {
            return Err(Error::State { node: i, reason: format!("pressure {} is not positive", w[2]) });
        }
    }
    Ok(())
}

/// Conservative variables of one node.
pub fn conservative_node(w: &[f64], gamma: f64, q: &mut [f64]) {
    if w.len() == 3 {
        let (rho, u, p) = (w[0], w[1], w[2]);
        q[0] = rho;
        q[1] = rho * u;
        q[2] = p / (gamma - 1.0) + 0.5 * rho * u * u;
    } else {
        q.copy_from_slice(w);
    }
}

/// Primitive variables of one node; no admissibility check.
pub fn primitive_node(q: &[f64], gamma: f64, w: &mut [f64]) {
    if q.len() == 3 {
        let rho = q[0];
        let u = q[1] / rho;
        w[0] = rho;
        w[1] = u;
        w[2] = (gamma - 1.0) * (q[2] - 0.5 * rho * u * u);
    } else {
        w.copy_from_slice(q);
    }
}

/// Row-major `dQ/dW` of one node.
pub fn transform_node(w: &[f64], gamma: f64, m: &mut [f64]) {
    if w.len() == 3 {
        let (rho, u) = (w[0], w[1]);
        m.copy_from_slice(&[1.0, 0.0, 0.0, u, rho, 0.0, 0.5 * u * u, rho * u, 1.0 / (gamma - 1.0)]);
    } else {
        identity(w.len(), m);
    }
}

/// Row-major `dW/dQ` of one node.
pub fn inverse_transform_node(w: &[f64], gamma: f64, m: &mut [f64]) {
    if w.len() == 3 {
        let (rho, u) = (w[0], w[1]);
        let g1 = gamma - 1.0;
        m.copy_from_slice(&[1.0, 0.0, 0.0, -u / rho, 1.0 / rho, 0.0, 0.5 * g1 * u * u, -g1 * u, g1]);
    } else {
        identity(w.len(), m);
    }
}

fn identity(b: usize, m: &mut [f64]) {
    m.iter_mut().for_each(|v| *v = 0.0);
    for r in 0..b {
        m[r * b + r] = 1.0;
    }
}

pub fn primitive_to_conservative(w: &PrimitiveState, gas: &GasModel) -> Result<ConservativeState> {
    w.check_admissible()?;
    let mut q = vec![0.0; w.values.len()];
    for (src, dst) in w.nodes().zip(q.chunks_mut(w.block)) {
        conservative_node(src, gas.gamma(), dst);
    }
    Ok(ConservativeState { block: w.block, values: q })
}

pub fn conservative_to_primitive(q: &ConservativeState, gas: &GasModel) -> Result<PrimitiveState> {
    let mut w = vec![0.0; q.values.len()];
    for (i, (src, dst)) in q.nodes().zip(w.chunks_mut(q.block)).enumerate() {
        if q.block == 3 && src[0] > 0.0 && !(src[2] - 0.5 * src[1] * src[1] / src[0] > 0.0) {
            return Err(Error::State { node: i, reason: "internal energy is not positive".into() });
        }
        primitive_node(src, gas.gamma(), dst);
        check_node(i, dst)?;
    }
    Ok(PrimitiveState { block: q.block, values: w })
}

pub fn transform_jacobian(w: &PrimitiveState, gas: &GasModel) -> Result<TransformJacobian> {
    w.check_admissible()?;
    let bl = w.block * w.block;
    let mut values = vec![0.0; w.n_nodes() * bl];
    for (src, dst) in w.nodes().zip(values.chunks_mut(bl)) {
        transform_node(src, gas.gamma(), dst);
    }
    Ok(TransformJacobian { block: w.block, values })
}

/// `W(t) = mean + sum_l 2 Re(W_l exp(i omega_l t))`.
pub fn reconstruct_instantaneous(mean: &PrimitiveState, harmonics: &[HarmonicField], t: f64) -> Result<PrimitiveState> {
    let mut out = mean.clone();
    for h in harmonics {
        if h.values.len() != mean.values.len() {
            return Err(Error::Shape(format!(
                "harmonic {} has {} values, mean has {}",
                h.index,
                h.values.len(),
                mean.values.len()
            )));
        }
        let phase = Complex64::new(0.0, h.omega * t).exp();
        for (o, a) in out.values.iter_mut().zip(&h.values) {
            *o += 2.0 * (a * phase).re;
        }
    }
    Ok(out)
}
