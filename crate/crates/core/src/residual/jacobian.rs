use std::sync::Arc;

use super::boundary::{inlet_state, outlet_state};
use super::euler::{euler_flux, euler_flux_jacobian, sound_speed};
use super::{scalar, EulerModel, Physics};
use crate::error::{Error, Result};
use crate::model::Mesh;
use crate::sparse::{dense, BlockSparsityPattern, RealMatrix};
use crate::state::{check_node, inverse_transform_node, transform_node, PrimitiveState};

pub fn build_pattern(mesh: &Mesh, block: usize) -> Result<Arc<BlockSparsityPattern>> {
    Ok(Arc::new(BlockSparsityPattern::from_edges(mesh.n_nodes(), block, mesh.edges())?))
}

/// First-order residual Jacobian with respect to the primitive variables.
pub fn assemble_jacobian(physics: &Physics, mesh: &Mesh, w: &PrimitiveState) -> Result<RealMatrix> {
    let mut j = RealMatrix::zeros(build_pattern(mesh, physics.block())?);
    assemble_jacobian_into(physics, mesh, w.values(), &mut j)?;
    Ok(j)
}

pub fn assemble_jacobian_into(physics: &Physics, mesh: &Mesh, w: &[f64], out: &mut RealMatrix) -> Result<()> {
    let b = physics.block();
    if out.n_rows() != mesh.n_nodes() || out.block_size() != b || w.len() != mesh.n_nodes() * b {
        return Err(Error::Shape("Jacobian buffer does not match mesh".into()));
    }
    out.fill_zero();
    match physics {
        Physics::Euler(m) => euler_jacobian(m, mesh, w, out)?,
        Physics::Scalar(m) => {
            for (r, c, v) in scalar::jacobian_entries(m, mesh) {
                out.block_mut(r, c).expect("scalar stencil inside pattern")[0] += v;
            }
        }
    }
    let mut inv = vec![0.0; b * b];
    for i in 0..mesh.n_nodes() {
        let d = out.diag_block(i);
        if d.iter().any(|v| !v.is_finite()) || dense::invert(b, d, &mut inv).is_err() {
            return Err(Error::Assembly { node: i });
        }
    }
    Ok(())
}

fn add_block(out: &mut RealMatrix, r: usize, c: usize, blk: &[f64; 9], sign: f64) {
    let dst = out.block_mut(r, c).expect("face neighbours inside pattern");
    for (d, s) in dst.iter_mut().zip(blk) {
        *d += sign * s;
    }
}

fn euler_jacobian(m: &EulerModel, mesh: &Mesh, w: &[f64], out: &mut RealMatrix) -> Result<()> {
    let n = mesh.nx();
    let g = m.gamma;
    for i in 0..n {
        check_node(i, &w[3 * i..3 * i + 3])?;
    }
    let node = |i: usize| &w[3 * i..3 * i + 3];
    for k in 1..n {
        let (l, r) = (k - 1, k);
        let (wl, wr) = (node(l), node(r));
        let (cl, cr) = (sound_speed(wl, g), sound_speed(wr, g));
        let ubar = 0.5 * (wl[1] + wr[1]);
        let lam = ubar.abs() + 0.5 * (cl + cr);
        let sgn = if ubar > 0.0 {
            1.0
        } else if ubar < 0.0 {
            -1.0
        } else {
            0.0
        };
        let dlam = |ws: &[f64], c: f64| [-0.25 * c / ws[0], 0.5 * sgn, 0.25 * c / ws[2]];
        let mut ql = [0.0; 3];
        let mut qr = [0.0; 3];
        crate::state::conservative_node(wl, g, &mut ql);
        crate::state::conservative_node(wr, g, &mut qr);
        let a = mesh.x_face_area(k);
        let side = |ws: &[f64], c: f64, sign: f64| {
            let fw = euler_flux_jacobian(ws, g);
            let mut mt = [0.0; 9];
            transform_node(ws, g, &mut mt);
            let dl = dlam(ws, c);
            let mut blk = [0.0; 9];
            for row in 0..3 {
                for col in 0..3 {
                    blk[3 * row + col] = a
                        * (0.5 * fw[3 * row + col] + sign * 0.5 * lam * mt[3 * row + col]
                            - 0.5 * (qr[row] - ql[row]) * dl[col]);
                }
            }
            blk
        };
        let bl = side(wl, cl, 1.0);
        let br = side(wr, cr, -1.0);
        add_block(out, l, l, &bl, 1.0);
        add_block(out, l, r, &br, 1.0);
        add_block(out, r, l, &bl, -1.0);
        add_block(out, r, r, &br, -1.0);
    }

    let a_in = mesh.x_face_area(0);
    let a_out = mesh.x_face_area(n);
    let inlet = |ws: &[f64]| -> Result<[f64; 3]> {
        let f = euler_flux(&inlet_state(m, ws)?, g);
        Ok([-a_in * f[0], -a_in * f[1], -a_in * f[2]])
    };
    let outlet = |ws: &[f64]| -> Result<[f64; 3]> {
        let f = euler_flux(&outlet_state(m, ws), g);
        Ok([a_out * f[0], a_out * f[1], a_out * f[2]])
    };
    let bin = boundary_block(node(0), g, inlet)?;
    add_block(out, 0, 0, &bin, 1.0);
    let bout = boundary_block(node(n - 1), g, outlet)?;
    add_block(out, n - 1, n - 1, &bout, 1.0);

    for i in 0..n {
        let dsrc = mesh.x_face_area(i + 1) - mesh.x_face_area(i);
        out.block_mut(i, i).expect("diagonal")[5] -= dsrc;
    }
    Ok(())
}

/// Central differences of a boundary flux with respect to its interior node.
fn boundary_block(ws: &[f64], g: f64, f: impl Fn(&[f64]) -> Result<[f64; 3]>) -> Result<[f64; 9]> {
    let scale = [ws[0], ws[1].abs() + sound_speed(ws, g), ws[2]];
    let mut blk = [0.0; 9];
    for col in 0..3 {
        let h = 1e-6 * scale[col];
        let mut wp = [ws[0], ws[1], ws[2]];
        let mut wm = wp;
        wp[col] += h;
        wm[col] -= h;
        let (fp, fm) = (f(&wp)?, f(&wm)?);
        for row in 0..3 {
            blk[3 * row + col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(blk)
}

/// Rewrites each block column `j` as `J_j M_j^{-1}`, turning a
/// primitive-variable Jacobian into one acting on conservative increments.
pub fn to_conservative_columns(physics: &Physics, w: &[f64], j: &mut RealMatrix) {
    let b = physics.block();
    if b == 1 {
        return;
    }
    let bl = b * b;
    let g = physics.gamma();
    let n = j.n_rows();
    let mut inv = vec![0.0; n * bl];
    for (i, dst) in inv.chunks_mut(bl).enumerate() {
        inverse_transform_node(&w[i * b..(i + 1) * b], g, dst);
    }
    let pattern = j.pattern().clone();
    let mut tmp = vec![0.0; bl];
    for i in 0..n {
        for pos in pattern.row(i) {
            let c = pattern.col(pos);
            let blk = j.block_at_mut(pos);
            dense::gemm(b, blk, &inv[c * bl..(c + 1) * bl], &mut tmp);
            blk.copy_from_slice(&tmp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, CaseConfig};
    use crate::residual::Order;

    /// Column-by-column central differences of the first-order residual,
    /// including the dependence of the boundary states on the interior.
    fn fd_jacobian(phys: &Physics, mesh: &Mesh, w: &[f64]) -> Vec<Vec<f64>> {
        let n = w.len();
        let scales = phys.variable_scales(w);
        let b = phys.block();
        let eval = |x: &[f64]| {
            let bnd = phys.mean_boundary(mesh, x).unwrap();
            phys.residual(mesh, x, &bnd, Order::First).unwrap().total()
        };
        (0..n)
            .map(|col| {
                let h = 1e-6 * scales[col % b];
                let mut wp = w.to_vec();
                let mut wm = w.to_vec();
                wp[col] += h;
                wm[col] -= h;
                let (rp, rm) = (eval(&wp), eval(&wm));
                rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect()
    }

    fn compare(phys: &Physics, mesh: &Mesh, w: &[f64]) -> f64 {
        let jac = assemble_jacobian(phys, mesh, &PrimitiveState::new(phys.block(), w.to_vec()).unwrap()).unwrap();
        let dense = jac.to_dense();
        let fd = fd_jacobian(phys, mesh, w);
        let n = w.len();
        let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut err = 0.0;
        for col in 0..n {
            for row in 0..n {
                let d = dense[row * n + col] - fd[col][row];
                err += d * d;
            }
        }
        err.sqrt() / norm
    }

    #[test]
    fn nozzle_jacobian_matches_differences() {
        let cfg = CaseConfig::nozzle(10, 0);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let mut w = crate::model::nozzle_steady_reference(&cfg).unwrap().into_values();
        for (i, v) in w.iter_mut().enumerate() {
            *v *= 1.0 + 0.01 * ((i as f64) * 0.7).sin();
        }
        assert!(compare(&phys, &mesh, &w) < 1e-6);
    }

    #[test]
    fn scalar_jacobian_matches_differences() {
        let cfg = CaseConfig::scalar(6, 4, 1);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let w: Vec<f64> = (0..24).map(|i| (i as f64 * 0.37).cos()).collect();
        assert!(compare(&phys, &mesh, &w) < 1e-8);
    }

    #[test]
    fn conservative_columns_undo_transform() {
        let cfg = CaseConfig::nozzle(6, 0);
        let mesh = build_mesh(&cfg).unwrap();
        let phys = Physics::from_config(&cfg);
        let w = crate::model::nozzle_steady_reference(&cfg).unwrap();
        let mut j = assemble_jacobian(&phys, &mesh, &w).unwrap();
        let orig = j.clone();
        to_conservative_columns(&phys, w.values(), &mut j);
        // J_Q (M dW) == J_W dW
        let dw: Vec<f64> = (0..18).map(|i| 1.0 + i as f64).collect();
        let mut dq = vec![0.0; 18];
        for i in 0..6 {
            let mut mt = [0.0; 9];
            transform_node(w.node(i), 1.4, &mut mt);
            dense::gemv(3, &mt, &dw[3 * i..3 * i + 3], &mut dq[3 * i..3 * i + 3]);
        }
        let mut a = vec![0.0; 18];
        let mut b = vec![0.0; 18];
        j.mul_vec(&dq, &mut a);
        orig.mul_vec(&dw, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }
}
