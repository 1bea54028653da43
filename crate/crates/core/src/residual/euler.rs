use super::{EulerModel, Order};
use crate::error::Result;
use crate::model::Mesh;
use crate::state::{check_node, conservative_node};

pub fn euler_flux(w: &[f64], gamma: f64) -> [f64; 3] {
    let (rho, u, p) = (w[0], w[1], w[2]);
    let h = gamma * p / (gamma - 1.0) + 0.5 * rho * u * u;
    [rho * u, rho * u * u + p, u * h]
}

/// Row-major `dF/dW` in primitive variables.
pub fn euler_flux_jacobian(w: &[f64], gamma: f64) -> [f64; 9] {
    let (rho, u, p) = (w[0], w[1], w[2]);
    let g1 = gamma - 1.0;
    [
        u,
        rho,
        0.0,
        u * u,
        2.0 * rho * u,
        1.0,
        0.5 * u * u * u,
        gamma * p / g1 + 1.5 * rho * u * u,
        gamma * u / g1,
    ]
}

pub(super) fn sound_speed(w: &[f64], gamma: f64) -> f64 {
    (gamma * w[2] / w[0]).sqrt()
}

/// Pressure switch per node; `p` carries one ghost value at each end.
fn pressure_sensor(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 2;
    let smooth = 1e-2 * p[1..=n].iter().sum::<f64>();
    (1..=n)
        .map(|i| {
            let d2 = p[i + 1] - 2.0 * p[i] + p[i - 1];
            ((d2 * d2 + smooth * smooth).sqrt() - smooth) / (p[i + 1] + 2.0 * p[i] + p[i - 1])
        })
        .collect()
}

pub(super) fn residual(m: &EulerModel, mesh: &Mesh, w: &[f64], bnd: &[f64], order: Order) -> Result<Vec<f64>> {
    let n = mesh.nx();
    let g = m.gamma;
    // conservative states and pressures shifted by one for the ghosts
    let mut q = vec![[0.0; 3]; n + 2];
    let mut p = vec![0.0; n + 2];
    let mut f = vec![[0.0; 3]; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        let node = &w[3 * i..3 * i + 3];
        check_node(i, node)?;
        conservative_node(node, g, &mut q[i + 1]);
        p[i + 1] = node[2];
        f[i] = euler_flux(node, g);
        c[i] = sound_speed(node, g);
    }
    for k in 0..3 {
        q[0][k] = 2.0 * q[1][k] - q[2][k];
        q[n + 1][k] = 2.0 * q[n][k] - q[n - 1][k];
    }
    p[0] = 2.0 * p[1] - p[2];
    p[n + 1] = 2.0 * p[n] - p[n - 1];
    let sensor = match order {
        Order::Second => pressure_sensor(&p),
        Order::First => Vec::new(),
    };

    let mut r = vec![0.0; 3 * n];
    for k in 1..n {
        let (l, rr) = (k - 1, k);
        let lam = (0.5 * (w[3 * l + 1] + w[3 * rr + 1])).abs() + 0.5 * (c[l] + c[rr]);
        let (ql, qr) = (q[l + 1], q[rr + 1]);
        let mut d = [0.0; 3];
        match order {
            Order::First => {
                for v in 0..3 {
                    d[v] = 0.5 * lam * (qr[v] - ql[v]);
                }
            }
            Order::Second => {
                let e2 = m.k2 * 0.5 * (sensor[l] + sensor[rr]);
                let e4 = (m.k4 - e2).max(0.0);
                let (qll, qrr) = (q[l], q[rr + 2]);
                for v in 0..3 {
                    let third = qrr[v] - 3.0 * qr[v] + 3.0 * ql[v] - qll[v];
                    d[v] = lam * (e2 * (qr[v] - ql[v]) - e4 * third);
                }
            }
        }
        let a = mesh.x_face_area(k);
        for v in 0..3 {
            let flux = a * (0.5 * (f[l][v] + f[rr][v]) - d[v]);
            r[3 * l + v] += flux;
            r[3 * rr + v] -= flux;
        }
    }
    let fin = euler_flux(&bnd[0..3], g);
    let fout = euler_flux(&bnd[3..6], g);
    for v in 0..3 {
        r[v] -= mesh.x_face_area(0) * fin[v];
        r[3 * (n - 1) + v] += mesh.x_face_area(n) * fout[v];
    }
    for i in 0..n {
        r[3 * i + 1] -= p[i + 1] * (mesh.x_face_area(i + 1) - mesh.x_face_area(i));
    }
    Ok(r)
}
