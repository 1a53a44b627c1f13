//! Unit-area model surfaces of constant curvature: the round sphere and flat
//! tori, with geodesic distance, polar charts and the closed-form disk laws.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point on a model surface. Sphere points are Euclidean 3-vectors on the
/// sphere of radius [`sphere_radius`]; torus points are `(u, v, 0)` with
/// `(u, v)` reduced to the fundamental parallelogram.
pub type SurfacePoint = [f64; 3];

/// Radius of the round sphere with total area 1.
pub fn sphere_radius() -> f64 {
    1.0 / (4.0 * PI).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Sphere,
    FlatTorus,
}

/// Unit-area lattice in the plane. The stored basis is Lagrange reduced and
/// positively oriented, so minimum-image searches only need the 3x3
/// neighbourhood of the rounded coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    basis: [[f64; 2]; 2],
    inverse: [[f64; 2]; 2],
}

impl Lattice {
    pub fn new(a1: [f64; 2], a2: [f64; 2]) -> Result<Self> {
        let det = a1[0] * a2[1] - a1[1] * a2[0];
        if !det.is_finite() || (det.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "lattice basis must span a unit-area cell, got area {}",
                det.abs()
            )));
        }
        let (mut u, mut v) = (a1, a2);
        loop {
            if norm2(v) < norm2(u) {
                std::mem::swap(&mut u, &mut v);
            }
            let mu = (u[0] * v[0] + u[1] * v[1]) / norm2(u);
            if mu.abs() <= 0.5 + 1e-12 {
                break;
            }
            let m = mu.round();
            v = [v[0] - m * u[0], v[1] - m * u[1]];
        }
        if u[0] * v[1] - u[1] * v[0] < 0.0 {
            v = [-v[0], -v[1]];
        }
        let d = u[0] * v[1] - u[1] * v[0];
        let inverse = [[v[1] / d, -v[0] / d], [-u[1] / d, u[0] / d]];
        Ok(Self { basis: [u, v], inverse })
    }

    pub fn square() -> Self {
        Self::new([1.0, 0.0], [0.0, 1.0]).expect("unit square lattice")
    }

    /// Hexagonal lattice with a unit-area fundamental cell.
    pub fn equilateral() -> Self {
        let l = (2.0 / 3f64.sqrt()).sqrt();
        Self::new([l, 0.0], [0.5 * l, 0.5 * 3f64.sqrt() * l]).expect("equilateral lattice")
    }

    pub fn basis(&self) -> [[f64; 2]; 2] {
        self.basis
    }

    /// Lattice coordinates `(s, t)` with `x = s a1 + t a2`.
    pub fn coords(&self, x: [f64; 2]) -> [f64; 2] {
        let m = &self.inverse;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn point(&self, s: f64, t: f64) -> [f64; 2] {
        let [a, b] = self.basis;
        [s * a[0] + t * b[0], s * a[1] + t * b[1]]
    }

    pub fn shortest_vector(&self) -> f64 {
        norm2(self.basis[0]).sqrt()
    }

    /// Reduce a planar point into the half-open fundamental parallelogram.
    pub fn reduce(&self, x: [f64; 2]) -> [f64; 2] {
        let [s, t] = self.coords(x);
        let wrap = |c: f64| {
            let f = c - c.floor();
            if f >= 1.0 {
                0.0
            } else {
                f
            }
        };
        self.point(wrap(s), wrap(t))
    }

    /// Shortest representative of `d` modulo the lattice.
    pub fn min_image(&self, d: [f64; 2]) -> [f64; 2] {
        let [s, t] = self.coords(d);
        let (s0, t0) = (s.round(), t.round());
        let mut best = d;
        let mut best_n = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                let off = self.point(s0 + i as f64, t0 + j as f64);
                let c = [d[0] - off[0], d[1] - off[1]];
                let n = norm2(c);
                if n < best_n {
                    best_n = n;
                    best = c;
                }
            }
        }
        best
    }

    /// Eigenvalues `4π²|w|²` of the flat Laplacian for the nonzero dual
    /// lattice vectors `w`, sorted, with multiplicity.
    pub fn laplace_spectrum(&self, count: usize) -> Vec<f64> {
        let r = (count as f64).sqrt().ceil() as i64 + 3;
        let m = &self.inverse;
        let mut out = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                if i == 0 && j == 0 {
                    continue;
                }
                let (i, j) = (i as f64, j as f64);
                let w = [i * m[0][0] + j * m[1][0], i * m[0][1] + j * m[1][1]];
                out.push(4.0 * PI * PI * norm2(w));
            }
        }
        out.sort_by(f64::total_cmp);
        out.truncate(count);
        out
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Serializable description of a model surface as it appears in configs and
/// packing files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceDescriptor {
    Sphere,
    SquareTorus,
    EquilateralTorus,
    Torus { basis: [[f64; 2]; 2] },
    Hyperbolic { genus: u32 },
}

impl SurfaceDescriptor {
    /// Parse the short names used on the command line.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sphere" => Ok(Self::Sphere),
            "square-torus" | "torus" => Ok(Self::SquareTorus),
            "equilateral-torus" | "hex-torus" => Ok(Self::EquilateralTorus),
            other => Err(Error::Usage(format!("unknown surface '{other}'"))),
        }
    }
}

/// Unit-area closed surface with constant curvature `2πχ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSurface {
    kind: SurfaceKind,
    lattice: Option<Lattice>,
    descriptor: SurfaceDescriptor,
    injectivity_radius: f64,
    r0: f64,
}

impl ModelSurface {
    pub fn sphere() -> Self {
        let inj = PI * sphere_radius();
        let mut s = Self {
            kind: SurfaceKind::Sphere,
            lattice: None,
            descriptor: SurfaceDescriptor::Sphere,
            injectivity_radius: inj,
            r0: inj,
        };
        s.r0 = s.bracket_radius();
        s
    }

    pub fn torus(lattice: Lattice) -> Self {
        Self::torus_with(lattice, SurfaceDescriptor::Torus { basis: lattice.basis() })
    }

    pub fn square_torus() -> Self {
        Self::torus_with(Lattice::square(), SurfaceDescriptor::SquareTorus)
    }

    pub fn equilateral_torus() -> Self {
        Self::torus_with(Lattice::equilateral(), SurfaceDescriptor::EquilateralTorus)
    }

    fn torus_with(lattice: Lattice, descriptor: SurfaceDescriptor) -> Self {
        let inj = 0.5 * lattice.shortest_vector();
        Self {
            kind: SurfaceKind::FlatTorus,
            lattice: Some(lattice),
            descriptor,
            injectivity_radius: inj,
            r0: f64::INFINITY,
        }
    }

    pub fn from_descriptor(d: &SurfaceDescriptor) -> Result<Self> {
        match d {
            SurfaceDescriptor::Sphere => Ok(Self::sphere()),
            SurfaceDescriptor::SquareTorus => Ok(Self::square_torus()),
            SurfaceDescriptor::EquilateralTorus => Ok(Self::equilateral_torus()),
            SurfaceDescriptor::Torus { basis } => {
                let l = Lattice::new(basis[0], basis[1])?;
                Ok(Self::torus_with(l, d.clone()))
            }
            SurfaceDescriptor::Hyperbolic { genus } => Err(Error::Domain(format!(
                "hyperbolic surfaces (genus {genus}) are not supported; use a sphere or flat torus"
            ))),
        }
    }

    pub fn descriptor(&self) -> &SurfaceDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn euler_char(&self) -> i32 {
        match self.kind {
            SurfaceKind::Sphere => 2,
            SurfaceKind::FlatTorus => 0,
        }
    }

    /// Gaussian curvature, `2πχ` for a unit-area surface.
    pub fn curvature(&self) -> f64 {
        2.0 * PI * self.euler_char() as f64
    }

    pub fn area(&self) -> f64 {
        1.0
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    /// Largest radius on which `(3/4)2πt <= L(t) <= (5/4)2πt`. Infinite for
    /// flat tori, where `L(t) = 2πt` exactly.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    fn bracket_radius(&self) -> f64 {
        if self.euler_char() == 0 {
            return f64::INFINITY;
        }
        let ok = |t: f64| {
            let l = self.length_law(t);
            let c = 2.0 * PI * t;
            l >= 0.75 * c && l <= 1.25 * c
        };
        let (mut lo, mut hi) = (1e-6, self.injectivity_radius);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Analytic first nonzero eigenvalue of the Laplacian (area is 1, so
    /// this is also the normalized value) and its multiplicity.
    pub fn lambda1(&self) -> (f64, usize) {
        match &self.lattice {
            None => (8.0 * PI, 3),
            Some(l) => {
                let spec = l.laplace_spectrum(16);
                let m = spec.iter().take_while(|&&x| x <= spec[0] * (1.0 + 1e-9)).count();
                (spec[0], m)
            }
        }
    }

    fn length_law(&self, t: f64) -> f64 {
        let chi = self.euler_char() as f64;
        if chi == 0.0 {
            2.0 * PI * t
        } else {
            (2.0 * PI / chi).sqrt() * ((2.0 * PI * chi).sqrt() * t).sin()
        }
    }

    fn check_radius(&self, t: f64) -> Result<()> {
        let limit = self.injectivity_radius;
        let inclusive = self.kind == SurfaceKind::Sphere;
        if !(t >= 0.0) || t > limit || (!inclusive && t == limit) {
            return Err(Error::Domain(format!(
                "radius {t} outside [0, {limit}] where the disk laws are valid"
            )));
        }
        Ok(())
    }

    /// Length of the geodesic circle of radius `t`.
    pub fn disk_boundary_length(&self, t: f64) -> Result<f64> {
        self.check_radius(t)?;
        Ok(self.length_law(t))
    }

    /// Area of the geodesic disk of radius `t`.
    pub fn disk_area(&self, t: f64) -> Result<f64> {
        self.check_radius(t)?;
        let chi = self.euler_char() as f64;
        Ok(if chi == 0.0 {
            PI * t * t
        } else {
            (1.0 - ((2.0 * PI * chi).sqrt() * t).cos()) / chi
        })
    }

    /// Geodesic distance.
    pub fn distance(&self, p: &SurfacePoint, q: &SurfacePoint) -> f64 {
        match &self.lattice {
            None => {
                let c = cross(p, q);
                sphere_radius() * norm3(&c).atan2(dot(p, q))
            }
            Some(l) => {
                let d = l.min_image([q[0] - p[0], q[1] - p[1]]);
                norm2(d).sqrt()
            }
        }
    }

    /// Canonical representative of a point: projected to the sphere or
    /// reduced to the fundamental domain.
    pub fn normalize(&self, p: &SurfacePoint) -> SurfacePoint {
        match &self.lattice {
            None => {
                let s = sphere_radius() / norm3(p);
                [p[0] * s, p[1] * s, p[2] * s]
            }
            Some(l) => {
                let r = l.reduce([p[0], p[1]]);
                [r[0], r[1], 0.0]
            }
        }
    }

    /// Orthonormal tangent frame at `c` with `e1 x e2` the outward normal.
    pub fn frame(&self, c: &SurfacePoint) -> ([f64; 3], [f64; 3]) {
        match self.kind {
            SurfaceKind::FlatTorus => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            SurfaceKind::Sphere => {
                let n = scale(c, 1.0 / norm3(c));
                let axis = (0..3)
                    .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
                    .unwrap();
                let mut h = [0.0; 3];
                h[axis] = 1.0;
                let e1 = sub(&h, &scale(&n, dot(&h, &n)));
                let e1 = scale(&e1, 1.0 / norm3(&e1));
                let e2 = cross(&n, &e1);
                (e1, e2)
            }
        }
    }

    /// Exponential map at `c` in the frame of [`ModelSurface::frame`].
    pub fn exp_map(&self, c: &SurfacePoint, v: [f64; 2]) -> SurfacePoint {
        match &self.lattice {
            Some(_) => self.normalize(&[c[0] + v[0], c[1] + v[1], 0.0]),
            None => {
                let r = sphere_radius();
                let (e1, e2) = self.frame(c);
                let len = norm2(v).sqrt();
                let n = scale(c, 1.0 / norm3(c));
                if len == 0.0 {
                    return scale(&n, r);
                }
                let th = len / r;
                let mut p = [0.0; 3];
                for i in 0..3 {
                    let dir = (v[0] * e1[i] + v[1] * e2[i]) / len;
                    p[i] = r * (th.cos() * n[i] + th.sin() * dir);
                }
                p
            }
        }
    }

    /// Inverse of [`ModelSurface::exp_map`] within the injectivity radius.
    pub fn log_map(&self, c: &SurfacePoint, p: &SurfacePoint) -> [f64; 2] {
        match &self.lattice {
            Some(l) => l.min_image([p[0] - c[0], p[1] - c[1]]),
            None => {
                let (e1, e2) = self.frame(c);
                let n = scale(c, 1.0 / norm3(c));
                let u = scale(p, 1.0 / norm3(p));
                let cos_t = dot(&n, &u);
                let tangent = sub(&u, &scale(&n, cos_t));
                let sin_t = norm3(&tangent);
                if sin_t == 0.0 {
                    return [0.0, 0.0];
                }
                let d = sphere_radius() * sin_t.atan2(cos_t) / sin_t;
                [d * dot(&tangent, &e1), d * dot(&tangent, &e2)]
            }
        }
    }

    /// `n` points on the geodesic circle of radius `r` about `c`, equally
    /// spaced in polar angle starting from the first frame direction.
    pub fn geodesic_circle_points(&self, c: &SurfacePoint, r: f64, n: usize) -> Result<Vec<SurfacePoint>> {
        self.geodesic_circle_points_rotated(c, r, n, 0.0)
    }

    pub(crate) fn geodesic_circle_points_rotated(
        &self,
        c: &SurfacePoint,
        r: f64,
        n: usize,
        phase: f64,
    ) -> Result<Vec<SurfacePoint>> {
        if !(r > 0.0) || r >= self.injectivity_radius {
            return Err(Error::Domain(format!(
                "circle radius {r} must lie in (0, {})",
                self.injectivity_radius
            )));
        }
        if n < 3 {
            return Err(Error::Domain(format!("need at least 3 circle points, got {n}")));
        }
        Ok((0..n)
            .map(|i| {
                let a = phase + 2.0 * PI * i as f64 / n as f64;
                self.exp_map(c, [r * a.cos(), r * a.sin()])
            })
            .collect())
    }

    /// Deterministic quasi-uniform sample of roughly `n` points, used to
    /// estimate covering radii. Returns the points and their spacing.
    pub fn quasi_uniform_samples(&self, n: usize) -> (Vec<SurfacePoint>, f64) {
        match &self.lattice {
            None => {
                let r = sphere_radius();
                let golden = PI * (3.0 - 5f64.sqrt());
                let pts = (0..n)
                    .map(|i| {
                        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                        let rho = (1.0 - z * z).sqrt();
                        let a = golden * i as f64;
                        [r * rho * a.cos(), r * rho * a.sin(), r * z]
                    })
                    .collect();
                (pts, (2.0 / (3f64.sqrt() * n as f64)).sqrt())
            }
            Some(l) => {
                let m = (n as f64).sqrt().ceil() as usize;
                let mut pts = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        let p = l.point(i as f64 / m as f64, j as f64 / m as f64);
                        pts.push([p[0], p[1], 0.0]);
                    }
                }
                let [a, b] = l.basis();
                let diag = ((a[0] + b[0]).powi(2) + (a[1] + b[1]).powi(2))
                    .max((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
                    .sqrt();
                (pts, diag / m as f64)
            }
        }
    }

    /// Uniformly distributed random point.
    pub fn random_point<R: rand::Rng>(&self, rng: &mut R) -> SurfacePoint {
        match &self.lattice {
            None => loop {
                let v: [f64; 3] = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                let n = norm3(&v);
                if n > 1e-3 && n <= 1.0 {
                    return self.normalize(&v);
                }
            },
            Some(l) => {
                let p = l.point(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                self.normalize(&[p[0], p[1], 0.0])
            }
        }
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_lattice_is_reduced_and_unit_area() {
        let l = Lattice::equilateral();
        let [a, b] = l.basis();
        assert!(((a[0] * b[1] - a[1] * b[0]) - 1.0).abs() < 1e-14);
        assert!((norm2(a) - norm2(b)).abs() < 1e-14);
    }

    #[test]
    fn reduce_stays_in_cell() {
        let l = Lattice::equilateral();
        for p in [[-3.7, 2.2], [0.0, 0.0], [10.1, -0.4]] {
            let [s, t] = l.coords(l.reduce(p));
            assert!((0.0..1.0).contains(&s) && (0.0..1.0).contains(&t));
        }
    }

    #[test]
    fn exp_log_round_trip_sphere() {
        let s = ModelSurface::sphere();
        let c = s.normalize(&[0.3, -0.2, 0.9]);
        let v = [0.12, -0.05];
        let back = s.log_map(&c, &s.exp_map(&c, v));
        assert!((back[0] - v[0]).abs() < 1e-13 && (back[1] - v[1]).abs() < 1e-13);
    }

    #[test]
    fn frame_is_outward_oriented() {
        let s = ModelSurface::sphere();
        for c in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [-0.2, 0.7, -0.1]] {
            let c = s.normalize(&c);
            let (e1, e2) = s.frame(&c);
            assert!(dot(&cross(&e1, &e2), &c) > 0.0);
        }
    }
}
