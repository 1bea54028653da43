//! Agglomeration multigrid with full-approximation forcing. Coarse levels use
//! the first-order residual.

use crate::error::{Error, Result};
use crate::model::Mesh;
use crate::residual::Order;
use crate::rk::{rk_step, StageSystem};
use crate::sparse::{LinearSolveReport, Scalar};

#[derive(Debug, Clone)]
pub struct GridHierarchy {
    levels: Vec<Mesh>,
    parents: Vec<Vec<usize>>,
}

impl GridHierarchy {
    pub fn new(finest: Mesh, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("multigrid needs at least one level".into()));
        }
        let mut meshes = vec![finest];
        let mut parents = Vec::new();
        for _ in 1..levels {
            let (coarse, parent) = meshes.last().expect("non-empty").coarsen()?;
            meshes.push(coarse);
            parents.push(parent);
        }
        Ok(Self { levels: meshes, parents })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn mesh(&self, level: usize) -> &Mesh {
        &self.levels[level]
    }

    pub fn meshes(&self) -> &[Mesh] {
        &self.levels
    }

    /// Coarse node of each node on `level`.
    pub fn parents(&self, level: usize) -> &[usize] {
        &self.parents[level]
    }

    pub fn order(&self, level: usize) -> Order {
        if level == 0 {
            Order::Second
        } else {
            Order::First
        }
    }

    /// Volume-weighted average from `level` to `level + 1`.
    pub fn restrict_state<T: Scalar>(&self, level: usize, fine: &[T], block: usize) -> Vec<T> {
        let (fm, cm) = (&self.levels[level], &self.levels[level + 1]);
        let mut out = vec![T::zero(); cm.n_nodes() * block];
        for (i, &c) in self.parents[level].iter().enumerate() {
            let v = fm.volume(i);
            for k in 0..block {
                out[c * block + k] += fine[i * block + k].scale(v);
            }
        }
        for c in 0..cm.n_nodes() {
            let v = cm.volume(c);
            for k in 0..block {
                out[c * block + k] = out[c * block + k].scale(1.0 / v);
            }
        }
        out
    }

    /// Sum over children from `level` to `level + 1`.
    pub fn restrict_residual<T: Scalar>(&self, level: usize, fine: &[T], block: usize) -> Vec<T> {
        let cm = &self.levels[level + 1];
        let mut out = vec![T::zero(); cm.n_nodes() * block];
        for (i, &c) in self.parents[level].iter().enumerate() {
            for k in 0..block {
                out[c * block + k] += fine[i * block + k];
            }
        }
        out
    }

    /// Coarse value plus a limited-free centred slope, evaluated at each
    /// child's centroid. Children average back to the coarse value.
    pub fn prolong<T: Scalar>(&self, level: usize, coarse: &[T], block: usize) -> Vec<T> {
        let (fm, cm) = (&self.levels[level], &self.levels[level + 1]);
        let (cnx, cny) = (cm.nx(), cm.ny());
        let mut slope_x = vec![T::zero(); coarse.len()];
        let mut slope_y = vec![T::zero(); coarse.len()];
        for c in 0..cm.n_nodes() {
            let (ix, iy) = (cm.ix(c), cm.iy(c));
            let lo = if ix > 0 { cm.node(ix - 1, iy) } else { c };
            let hi = if ix + 1 < cnx { cm.node(ix + 1, iy) } else { c };
            let dx = cm.coord(hi)[0] - cm.coord(lo)[0];
            if dx > 0.0 {
                for k in 0..block {
                    slope_x[c * block + k] = (coarse[hi * block + k] - coarse[lo * block + k]).scale(1.0 / dx);
                }
            }
            if cny > 1 {
                let down = cm.y_neighbor(c, -1);
                let up = cm.y_neighbor(c, 1);
                let span = match (down, up) {
                    (Some(_), Some(_)) => 2.0 * cm.dy(),
                    (None, None) => 0.0,
                    _ => cm.dy(),
                };
                if span > 0.0 {
                    let (d, u) = (down.unwrap_or(c), up.unwrap_or(c));
                    for k in 0..block {
                        slope_y[c * block + k] = (coarse[u * block + k] - coarse[d * block + k]).scale(1.0 / span);
                    }
                }
            }
        }
        let mut out = vec![T::zero(); fm.n_nodes() * block];
        for (i, &c) in self.parents[level].iter().enumerate() {
            let (xf, xc) = (fm.coord(i), cm.coord(c));
            let (ox, oy) = (xf[0] - xc[0], xf[1] - xc[1]);
            for k in 0..block {
                let mut v = coarse[c * block + k] + slope_x[c * block + k].scale(ox);
                if cny > 1 {
                    v += slope_y[c * block + k].scale(oy);
                }
                out[i * block + k] = v;
            }
        }
        out
    }
}

/// Cells per convected wavelength a coarse level needs before it may correct
/// a harmonic.
pub const MIN_CELLS_PER_WAVELENGTH: f64 = 16.0;

/// Number of levels, starting from the finest, whose cells resolve the
/// wavelength `2 pi speed / omega` of a perturbation convected at `speed`.
pub fn resolved_depth(h: &GridHierarchy, omega: f64, speed: f64) -> usize {
    if omega == 0.0 {
        return h.len();
    }
    let wavelength = 2.0 * std::f64::consts::PI * speed / omega.abs();
    1 + (1..h.len()).take_while(|&l| wavelength >= MIN_CELLS_PER_WAVELENGTH * h.mesh(l).dx()).count()
}

/// `R_coarse(I w) - I(R_fine - R*_fine)` with `fine_residual` already net of
/// the fine forcing.
pub fn fas_forcing<T: Scalar>(
    h: &GridHierarchy,
    fine_level: usize,
    coarse_residual: &[T],
    fine_residual: &[T],
    block: usize,
) -> Vec<T> {
    let restricted = h.restrict_residual(fine_level, fine_residual, block);
    coarse_residual.iter().zip(&restricted).map(|(a, b)| *a - *b).collect()
}

#[derive(Debug, Clone)]
pub struct CycleOutcome<T> {
    pub state: Vec<T>,
    /// Finest-level stage-1 residual.
    pub residual: Vec<T>,
    pub linear: Vec<LinearSolveReport>,
}

/// Admissibility of a corrected state; harmonic fields accept anything finite.
pub trait CorrectedState: StageSystem {
    fn check(&self, _state: &[Self::Value]) -> Result<()> {
        Ok(())
    }
}

/// One V-cycle: an RK step per level on the way down, then the accumulated
/// coarse corrections prolonged and added on the way up. `systems[l]` is the
/// level-`l` field, already set up with its level's residual order and LHS.
pub fn v_cycle<S: CorrectedState>(
    h: &GridHierarchy,
    systems: &mut [S],
    state: &[S::Value],
    block: usize,
) -> Result<CycleOutcome<S::Value>> {
    let levels = systems.len();
    if levels == 0 || levels > h.len() {
        return Err(Error::Config(format!("{levels} level systems for a {}-level hierarchy", h.len())));
    }
    let first = rk_step(&mut systems[0], state, None)?;
    let mut linear = first.linear;
    let residual = first.residual;
    let mut states = vec![first.state];
    let mut starts: Vec<Vec<S::Value>> = vec![Vec::new()];
    let mut forcing: Vec<Option<Vec<S::Value>>> = vec![None];
    for l in 1..levels {
        let fine = &states[l - 1];
        let (inv, vis) = systems[l - 1].evaluate(fine, true)?;
        let vis = vis.expect("viscous part requested");
        let mut r_fine: Vec<S::Value> = inv.iter().zip(&vis).map(|(a, b)| *a + *b).collect();
        if let Some(f) = &forcing[l - 1] {
            r_fine.iter_mut().zip(f).for_each(|(r, s)| *r -= *s);
        }
        let start = h.restrict_state(l - 1, fine, block);
        let (cinv, cvis) = systems[l].evaluate(&start, true)?;
        let cvis = cvis.expect("viscous part requested");
        let r_coarse: Vec<S::Value> = cinv.iter().zip(&cvis).map(|(a, b)| *a + *b).collect();
        let f = fas_forcing(h, l - 1, &r_coarse, &r_fine, block);
        let out = rk_step(&mut systems[l], &start, Some(&f))?;
        linear.extend(out.linear);
        states.push(out.state);
        starts.push(start);
        forcing.push(Some(f));
    }
    for l in (1..levels).rev() {
        let correction: Vec<S::Value> = states[l].iter().zip(&starts[l]).map(|(a, b)| *a - *b).collect();
        let fine_correction = h.prolong(l - 1, &correction, block);
        let fine = &mut states[l - 1];
        fine.iter_mut().zip(&fine_correction).for_each(|(a, c)| *a += *c);
        if fine.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { field: systems[l - 1].label(), stage: 0 });
        }
        systems[l - 1]
            .check(&states[l - 1])
            .map_err(|_| Error::Divergence { field: systems[l - 1].label(), stage: 0 })?;
    }
    let state = states.swap_remove(0);
    Ok(CycleOutcome { state, residual, linear })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, CaseConfig};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn hierarchy_1d(n: usize, levels: usize) -> GridHierarchy {
        let cfg = CaseConfig::nozzle(n, 0);
        GridHierarchy::new(build_mesh(&cfg).unwrap(), levels).unwrap()
    }

    fn hierarchy_2d(levels: usize) -> GridHierarchy {
        let cfg = CaseConfig::scalar(16, 12, 1);
        GridHierarchy::new(build_mesh(&cfg).unwrap(), levels).unwrap()
    }

    #[test]
    fn residual_pair_sums() {
        let h = hierarchy_1d(8, 2);
        let r = h.restrict_residual(0, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1);
        assert_eq!(r[0], 3.0);
    }

    #[test]
    fn constant_state_restricts_to_itself() {
        let h = hierarchy_1d(16, 3);
        let c = h.restrict_state(0, &[2.5; 16], 1);
        assert!(c.iter().all(|v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn complex_restriction_matches_real_parts() {
        let h = hierarchy_2d(2);
        let n = h.mesh(0).n_nodes();
        let re: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let im: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let rz = h.restrict_state(0, &z, 1);
        let (rr, ri) = (h.restrict_state(0, &re, 1), h.restrict_state(0, &im, 1));
        for k in 0..rz.len() {
            assert_eq!(rz[k], Complex64::new(rr[k], ri[k]));
        }
    }

    #[test]
    fn too_many_levels_rejected() {
        let cfg = CaseConfig::nozzle(8, 0);
        assert!(matches!(GridHierarchy::new(build_mesh(&cfg).unwrap(), 4), Err(Error::Coarsening(_))));
    }

    proptest! {
        #[test]
        fn restriction_conserves_sums(vals in proptest::collection::vec(-10.0f64..10.0, 64 * 3)) {
            let h = hierarchy_1d(64, 4);
            let mut fine = vals.clone();
            let total: Vec<f64> = (0..3).map(|k| fine.iter().skip(k).step_by(3).sum()).collect();
            for l in 0..3 {
                fine = h.restrict_residual(l, &fine, 3);
                for k in 0..3 {
                    let s: f64 = fine.iter().skip(k).step_by(3).sum();
                    prop_assert!((s - total[k]).abs() <= 1e-13 * vals.iter().map(|v| v.abs()).sum::<f64>());
                }
            }
        }

        #[test]
        fn prolong_then_restrict_is_identity_1d(vals in proptest::collection::vec(-5.0f64..5.0, 32)) {
            let h = hierarchy_1d(64, 2);
            let back = h.restrict_state(0, &h.prolong(0, &vals, 1), 1);
            for (a, b) in back.iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
            }
        }

        #[test]
        fn prolong_then_restrict_is_identity_2d(vals in proptest::collection::vec(-5.0f64..5.0, 48)) {
            let h = hierarchy_2d(2);
            let back = h.restrict_state(0, &h.prolong(0, &vals, 1), 1);
            for (a, b) in back.iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn depth_follows_wavelength() {
        let h = hierarchy_1d(64, 4);
        assert_eq!(resolved_depth(&h, 0.0, 0.0), 4);
        // wavelength 1/4 with dx = 1/64: 8 cells on level 1
        let w = 2.0 * std::f64::consts::PI * 4.0;
        assert_eq!(resolved_depth(&h, w, 1.0), 1);
        assert_eq!(resolved_depth(&h, w / 2.0, 1.0), 2);
        assert_eq!(resolved_depth(&h, w / 8.0, 1.0), 4);
        assert_eq!(resolved_depth(&h, w, 0.0), 1);
    }

    #[test]
    fn prolongation_reproduces_linear_fields() {
        let h = hierarchy_1d(16, 2);
        let (fm, cm) = (h.mesh(0), h.mesh(1));
        let coarse: Vec<f64> = (0..cm.n_nodes()).map(|c| 3.0 * cm.coord(c)[0] + 1.0).collect();
        let fine = h.prolong(0, &coarse, 1);
        for i in 0..fm.n_nodes() {
            assert!((fine[i] - (3.0 * fm.coord(i)[0] + 1.0)).abs() < 1e-12);
        }
    }
}
