//! Dual Sobolev distances between measures, conformal centering on the
//! sphere, the sphere gap certificate and logarithmic test functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fem::{assemble_stiffness, solve_refined, Factor, NodalMeasure, SparseSym};
use crate::mesh::{Geometry, TriMesh};
use crate::packing::{split_large_holes, DomainSpec};
use crate::spectra::steklov_normalized;
use crate::surface::{cross, dot, norm3, sub, ModelSurface, SurfacePoint};
use crate::{Error, Result};

/// Relative residual required of the linear solves behind every dual norm.
const DUAL_TOL: f64 = 1e-10;

/// Signed difference `μ - ν` of two nodal measures on one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureDiff {
    pub weights: Vec<f64>,
    pub mass_pos: f64,
    pub mass_neg: f64,
}

impl MeasureDiff {
    pub fn new(mu: &NodalMeasure, nu: &NodalMeasure) -> Result<Self> {
        if mu.len() != nu.len() {
            return Err(Error::Usage(format!("measures live on {} and {} vertices", mu.len(), nu.len())));
        }
        Ok(Self {
            weights: mu.weights.iter().zip(&nu.weights).map(|(a, b)| a - b).collect(),
            mass_pos: mu.mass(),
            mass_neg: nu.mass(),
        })
    }

    /// Difference of the probability measures proportional to `mu` and `nu`.
    pub fn probability(mu: &NodalMeasure, nu: &NodalMeasure) -> Result<Self> {
        for m in [mu, nu] {
            if !(m.mass() > 0.0) {
                return Err(Error::Degenerate(format!("measure '{}' has no mass", m.label)));
            }
        }
        Self::new(&mu.normalized(), &nu.normalized())
    }

    pub fn zero(n: usize) -> Self {
        Self { weights: vec![0.0; n], mass_pos: 0.0, mass_neg: 0.0 }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Factorizations reused across many dual-norm evaluations on one mesh.
pub struct DualNormSolver {
    k_ground: SparseSym,
    ground_factor: Factor,
    full: Option<(SparseSym, Factor)>,
    n: usize,
}

impl DualNormSolver {
    /// `area` enables [`DualNormSolver::full`].
    pub fn new(k: &SparseSym, area: Option<&NodalMeasure>) -> Result<Self> {
        let n = k.dim();
        if n < 2 {
            return Err(Error::Usage("dual norms need at least two vertices".into()));
        }
        let keep: Vec<usize> = (1..n).collect();
        let k_ground = k.principal(&keep);
        let ground_factor = k_ground.factor()?;
        let full = match area {
            Some(m) => {
                if m.len() != n {
                    return Err(Error::Usage("area measure does not match the stiffness matrix".into()));
                }
                let a = k.add_diagonal(&m.weights);
                let f = a.factor()?;
                Some((a, f))
            }
            None => None,
        };
        Ok(Self { k_ground, ground_factor, full, n })
    }

    /// `sup <f, d>` over `|df|_{L²} = 1`. Finite only for zero total weight.
    pub fn dot(&self, d: &MeasureDiff) -> Result<f64> {
        self.check(d)?;
        let scale = (d.mass_pos.abs() + d.mass_neg.abs()).max(d.weights.iter().map(|w| w.abs()).sum());
        let total = d.total();
        if total.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) && total != 0.0 {
            return Err(Error::InfiniteSeminorm { total });
        }
        let r = &d.weights[1..];
        let (x, _) = solve_refined(&self.k_ground, &self.ground_factor, r, DUAL_TOL)?;
        Ok(r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    /// `sup <f, d>` over `|f|_{W^{1,2}} = 1`.
    pub fn full(&self, d: &MeasureDiff) -> Result<f64> {
        self.check(d)?;
        let (a, f) = self
            .full
            .as_ref()
            .ok_or_else(|| Error::Usage("full dual norm needs an area measure".into()))?;
        let (x, _) = solve_refined(a, f, &d.weights, DUAL_TOL)?;
        Ok(d.weights.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    fn check(&self, d: &MeasureDiff) -> Result<()> {
        if d.weights.len() != self.n {
            return Err(Error::Usage(format!("difference has {} weights, mesh has {}", d.weights.len(), self.n)));
        }
        Ok(())
    }
}

pub fn dual_norm_dot(k: &SparseSym, d: &MeasureDiff) -> Result<f64> {
    DualNormSolver::new(k, None)?.dot(d)
}

pub fn dual_norm_full(k: &SparseSym, area: &NodalMeasure, d: &MeasureDiff) -> Result<f64> {
    DualNormSolver::new(k, Some(area))?.full(d)
}

/// Conformal dilation of the unit sphere fixing `±a/|a|` and pushing mass
/// towards `a/|a|`.
pub fn mobius_map(a: &[f64; 3], x: &[f64; 3]) -> [f64; 3] {
    let aa = dot(a, a);
    let ax = dot(a, x);
    let den = 1.0 + 2.0 * ax + aa;
    let c = 2.0 * (1.0 + ax);
    [
        ((1.0 - aa) * x[0] + c * a[0]) / den,
        ((1.0 - aa) * x[1] + c * a[1]) / den,
        ((1.0 - aa) * x[2] + c * a[2]) / den,
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct CenteredMap {
    /// Dilation parameter in the open unit ball.
    pub a: [f64; 3],
    /// Images of the input points on the unit sphere.
    pub images: Vec<[f64; 3]>,
    /// `|∫ G_a dμ| / μ(S²)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Centering tolerance on the normalized barycenter.
pub const CENTER_TOL: f64 = 1e-8;
const CENTER_MAX_ITER: usize = 200;

/// Find `a` with `∫ G_a dμ = 0` for a measure on points of a round sphere
/// (any radius). Damped Newton iteration from `a = 0`.
pub fn mobius_center_points(points: &[[f64; 3]], weights: &[f64]) -> Result<CenteredMap> {
    if points.len() != weights.len() {
        return Err(Error::Usage("one weight per point required".into()));
    }
    let support: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    let mass: f64 = support.iter().map(|&i| weights[i]).sum();
    if weights.iter().any(|&w| !(w >= 0.0)) || !(mass > 0.0) {
        return Err(Error::Degenerate("centering needs a nonnegative measure with positive mass".into()));
    }
    let unit: Vec<[f64; 3]> = points.iter().map(|p| {
        let n = norm3(p);
        [p[0] / n, p[1] / n, p[2] / n]
    }).collect();
    let distinct = support.iter().any(|&i| norm3(&sub(&unit[i], &unit[support[0]])) > 1e-12);
    if !distinct {
        return Err(Error::Degenerate("measure is concentrated at a single point".into()));
    }
    let bary = |a: &[f64; 3]| -> [f64; 3] {
        let mut s = [0.0; 3];
        for &i in &support {
            let y = mobius_map(a, &unit[i]);
            for d in 0..3 {
                s[d] += weights[i] * y[d];
            }
        }
        [s[0] / mass, s[1] / mass, s[2] / mass]
    };
    let mut a = [0.0; 3];
    let mut f = bary(&a);
    let mut iterations = 0;
    while norm3(&f) > 1e-3 * CENTER_TOL && iterations < CENTER_MAX_ITER {
        iterations += 1;
        let step = 1e-7 * (1.0 - norm3(&a)).max(1e-6);
        let mut jac = [[0.0; 3]; 3];
        for c in 0..3 {
            let (mut ap, mut am) = (a, a);
            ap[c] += step;
            am[c] -= step;
            let (fp, fm) = (bary(&ap), bary(&am));
            for r in 0..3 {
                jac[r][c] = (fp[r] - fm[r]) / (2.0 * step);
            }
        }
        let dir = solve3(&jac, &[-f[0], -f[1], -f[2]]).unwrap_or([-f[0], -f[1], -f[2]]);
        let fn0 = norm3(&f);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand = [a[0] + t * dir[0], a[1] + t * dir[1], a[2] + t * dir[2]];
            if norm3(&cand) < 1.0 - 1e-12 {
                let fc = bary(&cand);
                if norm3(&fc) < (1.0 - 1e-4 * t) * fn0 {
                    a = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = norm3(&f);
    if residual > CENTER_TOL {
        return Err(Error::Numeric { message: "Möbius centering did not converge".into(), residual });
    }
    let images = unit.iter().map(|x| mobius_map(&a, x)).collect();
    Ok(CenteredMap { a, images, residual, iterations })
}

/// Center a measure carried by the vertices of a sphere mesh.
pub fn mobius_center(m: &TriMesh, mu: &NodalMeasure) -> Result<CenteredMap> {
    if m.geometry != Geometry::Sphere {
        return Err(Error::Usage("Möbius centering needs a sphere mesh".into()));
    }
    if mu.len() != m.n_vertices() {
        return Err(Error::Usage("measure does not match the mesh".into()));
    }
    mobius_center_points(&m.vertices, &mu.weights)
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if !(d.abs() > 1e-300) {
        return None;
    }
    let mut x = [0.0; 3];
    for c in 0..3 {
        let mut m = *a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        x[c] = det(&m) / d;
    }
    Some(x)
}

#[derive(Clone, Debug)]
pub struct CertificateOptions {
    /// First Steklov eigenvalue, if already known for this measure.
    pub sigma1: Option<f64>,
    pub solver_tol: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { sigma1: None, solver_tol: 1e-9 }
    }
}

/// Both sides of the sphere gap inequality
/// `|σ₁μ - 2 dv⌊Ω|²_{(W^{1,2}(Ω))*} + 6 Area(S² \ Ω) <= 3 (8π - σ̄₁)`
/// evaluated on the unit sphere after centering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub a: [f64; 3],
    pub balance_residual: f64,
    pub sigma1: f64,
    pub sigma1_bar: f64,
    pub dual_norm_sq: f64,
    pub hole_area: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Relative tolerance `5 h_max + solver_tol` applied to the right side.
    pub tol: f64,
    pub holds: bool,
    /// `2E(u; Ω)` for the centered identity.
    pub energy: f64,
    /// `2E(u; Ω) - σ₁ μ(S²)`.
    pub pairing: f64,
    /// `|σ₁μ - |du|² dv|²` with the discrete energy density of `u`.
    pub energy_density_norm_sq: f64,
}

/// Center `mu` and evaluate the gap certificate.
pub fn certify_sphere(domain: &TriMesh, mu: &NodalMeasure, opts: &CertificateOptions) -> Result<GapCertificate> {
    let c = mobius_center(domain, mu)?;
    gap_certificate_sphere(domain, mu, &c, opts)
}

pub fn gap_certificate_sphere(
    domain: &TriMesh,
    mu: &NodalMeasure,
    centered: &CenteredMap,
    opts: &CertificateOptions,
) -> Result<GapCertificate> {
    if domain.geometry != Geometry::Sphere || domain.boundary_loops.is_empty() {
        return Err(Error::Usage("gap certificate needs a domain mesh on the sphere".into()));
    }
    if centered.residual > CENTER_TOL || centered.images.len() != domain.n_vertices() {
        return Err(Error::Usage("measure is not balanced; run mobius_center on this mesh first".into()));
    }
    let sigma1 = match opts.sigma1 {
        Some(s) => s,
        None => steklov_normalized(domain, mu, 3)?.eigenvalues[1],
    };
    let mass = mu.mass();
    let a = centered.a;
    let u = &centered.images;
    let n = domain.n_vertices();

    // Pulled-back round area of the mapped mesh.
    let mut area = vec![0.0; n];
    for t in &domain.triangles {
        let third = norm3(&cross(&sub(&u[t[1]], &u[t[0]]), &sub(&u[t[2]], &u[t[0]]))) / 6.0;
        for &v in t {
            area[v] += third;
        }
    }
    let k = assemble_stiffness(domain)?;
    let r: Vec<f64> = (0..n).map(|v| sigma1 * mu.weights[v] - 2.0 * area[v]).collect();
    let a_mat = k.add_diagonal(&area);
    let f = a_mat.factor()?;
    let (x, _) = solve_refined(&a_mat, &f, &r, DUAL_TOL)?;
    let dual_norm_sq: f64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();

    let hole_area: f64 = domain.boundary_loops.iter().map(|lp| mapped_cap_area(&a, &lp.center, lp.radius)).sum();

    let comps: Vec<Vec<f64>> = (0..3).map(|c| u.iter().map(|p| p[c]).collect()).collect();
    let energy: f64 = comps.iter().map(|c| k.quad(c)).sum();
    let mu_u2: f64 = (0..n).map(|v| mu.weights[v] * dot(&u[v], &u[v])).sum();
    let pairing = energy - sigma1 * mu_u2;

    // Nodal energy density of u: D_v = ½ Σ_j w_vj |u_v - u_j|².
    let mut density = vec![0.0; n];
    for i in 0..n {
        for (j, kij) in k.row(i) {
            if j != i {
                density[i] += -0.5 * kij * norm3(&sub(&u[i], &u[j])).powi(2);
            }
        }
    }
    let rd: Vec<f64> = (0..n).map(|v| sigma1 * mu.weights[v] - density[v]).collect();
    let (xd, _) = solve_refined(&a_mat, &f, &rd, DUAL_TOL)?;
    let energy_density_norm_sq: f64 = rd.iter().zip(&xd).map(|(a, b)| a * b).sum();

    let sigma1_bar = sigma1 * mass;
    let lhs = dual_norm_sq + 6.0 * hole_area;
    let rhs = 3.0 * (8.0 * PI - sigma1_bar);
    let tol = 5.0 * domain.h_max + opts.solver_tol;
    Ok(GapCertificate {
        a,
        balance_residual: centered.residual,
        sigma1,
        sigma1_bar,
        dual_norm_sq,
        hole_area,
        lhs,
        rhs,
        slack: rhs - lhs,
        tol,
        holds: lhs <= rhs * (1.0 + tol),
        energy,
        pairing,
        energy_density_norm_sq,
    })
}

/// Area of the image under `mobius_map(a, ·)` of a geodesic disk on the
/// unit-area sphere, measured on the unit sphere. Möbius maps send circles
/// to circles, so the image is a spherical cap.
fn mapped_cap_area(a: &[f64; 3], center: &SurfacePoint, radius: f64) -> f64 {
    let s = ModelSurface::sphere();
    let unit = |p: &SurfacePoint| {
        let n = norm3(p);
        [p[0] / n, p[1] / n, p[2] / n]
    };
    let pts = s
        .geodesic_circle_points(center, radius.min(0.999 * s.injectivity_radius()), 3)
        .expect("hole radius below the injectivity radius");
    let q: Vec<[f64; 3]> = pts.iter().map(|p| mobius_map(a, &unit(p))).collect();
    let nrm = cross(&sub(&q[1], &q[0]), &sub(&q[2], &q[0]));
    let nrm = [nrm[0] / norm3(&nrm), nrm[1] / norm3(&nrm), nrm[2] / norm3(&nrm)];
    let mut d = dot(&nrm, &q[0]);
    // Orient the plane normal towards the image of the hole center.
    if dot(&nrm, &mobius_map(a, &unit(center))) < d {
        d = -d;
    }
    2.0 * PI * (1.0 - d)
}

/// Logarithmic cutoff about the centers: `log k` within `√δ/k`,
/// `log(√δ/d)` out to `√δ`, zero beyond.
pub fn log_test_function(s: &ModelSurface, centers: &[SurfacePoint], points: &[SurfacePoint], delta: f64, k: usize) -> Result<Vec<f64>> {
    let kf = k as f64;
    if k == 0 || !(delta > 0.0 && delta < 1.0 / kf.sqrt()) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1/sqrt(k)) for k = {k}")));
    }
    let sd = delta.sqrt();
    Ok(points
        .iter()
        .map(|x| {
            let d = centers.iter().map(|c| s.distance(c, x)).fold(f64::INFINITY, f64::min);
            if d < sd / kf {
                kf.ln()
            } else {
                (sd / d).ln().max(0.0)
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct TestFunctionReport {
    /// `<φ, μ̂ - ν̂> / |φ|_{W^{1,2}}` with both measures normalized to mass 1.
    pub ratio: f64,
    pub pairing: f64,
    pub w12_norm: f64,
    /// `<φ, μ̂ - ν̂> / |dφ|_{L²}`, bounded by the homogeneous dual norm.
    pub gradient_ratio: f64,
    /// `σ μ(∂B_j)` summed over the large holes.
    pub large_hole_mass: f64,
    pub large_holes: usize,
    /// `k δ` and `sqrt(δ k log k)`.
    pub k_delta: f64,
    pub sqrt_delta_k_log_k: f64,
}

/// Evaluate a test function against the normalized difference of a
/// boundary measure and an area measure on the same (filled) mesh.
#[allow(clippy::too_many_arguments)]
pub fn test_function_ratio(
    phi: &[f64],
    k_mat: &SparseSym,
    area: &NodalMeasure,
    mu: &NodalMeasure,
    sigma: f64,
    spec: &DomainSpec,
    loops: &[Vec<usize>],
    delta: f64,
) -> Result<TestFunctionReport> {
    let n = k_mat.dim();
    if phi.len() != n || area.len() != n || mu.len() != n {
        return Err(Error::Usage("test function and measures must share a mesh".into()));
    }
    let d = MeasureDiff::probability(mu, area)?;
    let pairing: f64 = phi.iter().zip(&d.weights).map(|(a, b)| a * b).sum();
    let energy = k_mat.quad(phi).max(0.0);
    let l2 = area.integrate(&phi.iter().map(|x| x * x).collect::<Vec<_>>());
    let w12_norm = (energy + l2).sqrt();
    let split = split_large_holes(spec, delta);
    let large_hole_mass: f64 = split
        .large
        .iter()
        .filter_map(|&j| loops.get(j))
        .map(|lp| sigma * lp.iter().map(|&v| mu.weights[v]).sum::<f64>())
        .sum();
    let kf = spec.k() as f64;
    Ok(TestFunctionReport {
        ratio: if w12_norm > 0.0 { pairing / w12_norm } else { 0.0 },
        pairing,
        w12_norm,
        gradient_ratio: if energy > 0.0 { pairing / energy.sqrt() } else { 0.0 },
        large_hole_mass,
        large_holes: split.large.len(),
        k_delta: kf * delta,
        sqrt_delta_k_log_k: (delta * kf * kf.max(1.0).ln()).sqrt(),
    })
}
