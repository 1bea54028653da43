//! Advection along x with isotropic diffusion. Advection uses a central flux
//! with fourth-difference dissipation (first-difference at first order);
//! diffusion is the viscous part at both orders.

use super::{Order, ScalarModel, SplitResidual};
use crate::model::Mesh;

pub(super) fn residual(m: &ScalarModel, mesh: &Mesh, w: &[f64], bnd: &[f64], order: Order) -> SplitResidual<f64> {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let (dx, dy) = (mesh.dx(), mesh.dy());
    let a = m.speed;
    let nu = m.diffusivity;
    let mut out = SplitResidual::zeros(nx * ny);
    let (inv, vis) = (&mut out.inviscid, &mut out.viscous);

    for iy in 0..ny {
        let row = &w[iy * nx..(iy + 1) * nx];
        let at = |i: isize| -> f64 {
            if i < 0 {
                2.0 * row[0] - row[1]
            } else if i as usize >= nx {
                2.0 * row[nx - 1] - row[nx - 2]
            } else {
                row[i as usize]
            }
        };
        for k in 1..nx {
            let (l, r) = (k - 1, k);
            let ki = k as isize;
            let d = match order {
                Order::First => 0.5 * a.abs() * (row[r] - row[l]),
                Order::Second => {
                    let third = at(ki + 1) - 3.0 * at(ki) + 3.0 * at(ki - 1) - at(ki - 2);
                    -a.abs() * m.k4 * third
                }
            };
            let area = mesh.x_face_area(k);
            let adv = area * (a * 0.5 * (row[l] + row[r]) - d);
            let dif = -area * nu * (row[r] - row[l]) / dx;
            inv[iy * nx + l] += adv;
            inv[iy * nx + r] -= adv;
            vis[iy * nx + l] += dif;
            vis[iy * nx + r] -= dif;
        }
        let (a_in, a_out) = (mesh.x_face_area(0), mesh.x_face_area(nx));
        let first = iy * nx;
        let last = iy * nx + nx - 1;
        inv[first] -= a_in * a * bnd[iy];
        vis[first] -= a_in * (-nu * (row[0] - bnd[iy]) / (0.5 * dx));
        inv[last] += a_out * a * bnd[ny + iy];
        vis[last] += a_out * (-nu * (row[nx - 1] - row[nx - 2]) / dx);
    }

    if ny > 1 {
        let area = mesh.y_face_area();
        let top = if mesh.periodic_y() { ny } else { ny - 1 };
        for iy in 0..top {
            let up = (iy + 1) % ny;
            for ix in 0..nx {
                let (lo, hi) = (iy * nx + ix, up * nx + ix);
                let dif = -area * nu * (w[hi] - w[lo]) / dy;
                vis[lo] += dif;
                vis[hi] -= dif;
            }
        }
    }
    out
}

/// First-order Jacobian entries as `(row, col, value)` triplets.
pub(super) fn jacobian_entries(m: &ScalarModel, mesh: &Mesh) -> Vec<(usize, usize, f64)> {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let (dx, dy) = (mesh.dx(), mesh.dy());
    let a = m.speed;
    let nu = m.diffusivity;
    let mut e = Vec::new();
    for iy in 0..ny {
        for k in 1..nx {
            let (l, r) = (iy * nx + k - 1, iy * nx + k);
            let area = mesh.x_face_area(k);
            let dl = area * (0.5 * a + 0.5 * a.abs() + nu / dx);
            let dr = area * (0.5 * a - 0.5 * a.abs() - nu / dx);
            e.extend([(l, l, dl), (l, r, dr), (r, l, -dl), (r, r, -dr)]);
        }
        let (first, last) = (iy * nx, iy * nx + nx - 1);
        e.push((first, first, mesh.x_face_area(0) * nu / (0.5 * dx)));
        let a_out = mesh.x_face_area(nx);
        e.push((last, last, a_out * (a - nu / dx)));
        e.push((last, last - 1, a_out * nu / dx));
    }
    if ny > 1 {
        let area = mesh.y_face_area();
        let top = if mesh.periodic_y() { ny } else { ny - 1 };
        let g = area * nu / dy;
        for iy in 0..top {
            let up = (iy + 1) % ny;
            for ix in 0..nx {
                let (lo, hi) = (iy * nx + ix, up * nx + ix);
                e.extend([(lo, lo, g), (lo, hi, -g), (hi, lo, -g), (hi, hi, g)]);
            }
        }
    }
    e
}
