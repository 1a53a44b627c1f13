//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Returns ascending eigenvalues and the matching eigenvectors.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

/// `rᵀ K⁺ r` with the Moore-Penrose pseudo-inverse of a dense PSD matrix.
pub fn pseudo_inverse_quad(k: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    let (values, vectors) = jacobi_eigen(k);
    let top = values.iter().cloned().fold(0.0, f64::max);
    values
        .iter()
        .zip(&vectors)
        .filter(|(l, _)| **l > 1e-10 * top)
        .map(|(l, v)| {
            let c: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            c * c / l
        })
        .sum()
}

/// Radial profile of `Δψ = -1`, `ψ = 0` on the cap boundary, on the unit-area
/// sphere minus the geodesic cap of radius `a`. With `w = L ψ'` the system
/// is `ψ' = w / L`, `w' = L`; the initial flux `w(a)` is found by shooting
/// on `w(πR) = 0` and the profile is tabulated by RK4.
pub struct RadialOracle {
    a: f64,
    dt: f64,
    psi: Vec<f64>,
    /// Total flux through the cap boundary, `-w(a)`.
    pub flux: f64,
}

fn length(t: f64) -> f64 {
    PI.sqrt() * (2.0 * PI.sqrt() * t).sin()
}

impl RadialOracle {
    pub fn new(a: f64) -> Self {
        let end = 0.5 * PI.sqrt();
        let steps = 40_000;
        let dt = (end - a) / steps as f64;
        let rk4 = |w0: f64, record: bool| -> (f64, Vec<f64>) {
            let f = |t: f64, w: f64| -> [f64; 2] {
                let l = length(t);
                [if l > 1e-12 { w / l } else { 0.0 }, l]
            };
            let (mut psi, mut w) = (0.0, w0);
            let mut table = Vec::new();
            for i in 0..steps {
                if record {
                    table.push(psi);
                }
                let t = a + i as f64 * dt;
                let k1 = f(t, w);
                let k2 = f(t + 0.5 * dt, w + 0.5 * dt * k1[1]);
                let k3 = f(t + 0.5 * dt, w + 0.5 * dt * k2[1]);
                // The last step ends on the pole, where ψ' vanishes.
                let k4 = if i + 1 == steps { [0.0, length(t + dt)] } else { f(t + dt, w + dt * k3[1]) };
                psi += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                w += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            }
            if record {
                table.push(psi);
            }
            (w, table)
        };
        let (mut lo, mut hi) = (-2.0, 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if rk4(mid, false).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w0 = 0.5 * (lo + hi);
        let (_, psi) = rk4(w0, true);
        Self { a, dt, psi, flux: -w0 }
    }

    /// `ψ` at geodesic distance `t >= a` from the cap center.
    pub fn psi(&self, t: f64) -> f64 {
        let x = ((t - self.a) / self.dt).max(0.0);
        let i = (x.floor() as usize).min(self.psi.len() - 2);
        let f = x - i as f64;
        (1.0 - f) * self.psi[i] + f * self.psi[i + 1]
    }
}
