use serde::Serialize;

use super::{Region, TriMesh};
use crate::surface::dot;

#[derive(Clone, Debug, Serialize)]
pub struct HoleResolution {
    pub segments: usize,
    /// Largest deviation of a loop vertex from its geodesic circle.
    pub max_radial_error: f64,
    /// Polygonal length of the loop.
    pub length: f64,
    /// Length of the exact geodesic circle, when the surface is known.
    pub circle_length: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshQuality {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub euler_characteristic: i64,
    /// Euler characteristic predicted from the surface and the hole count.
    pub expected_euler: Option<i64>,
    pub manifold: bool,
    pub holes: Vec<HoleResolution>,
}

impl MeshQuality {
    pub fn euler_ok(&self) -> bool {
        self.expected_euler.is_none_or(|e| e == self.euler_characteristic)
    }
}

pub fn mesh_quality(m: &TriMesh) -> MeshQuality {
    let (mut amin, mut amax) = (f64::INFINITY, 0.0f64);
    let (mut hmin, mut hmax) = (f64::INFINITY, 0.0f64);
    for t in &m.triangles {
        for e in 0..3 {
            let (a, b, c) = (t[e], t[(e + 1) % 3], t[(e + 2) % 3]);
            let u = m.edge_vector(a, b);
            let v = m.edge_vector(a, c);
            let cos = dot(&u, &v) / (dot(&u, &u) * dot(&v, &v)).sqrt();
            let ang = cos.clamp(-1.0, 1.0).acos().to_degrees();
            amin = amin.min(ang);
            amax = amax.max(ang);
            let l = dot(&u, &u).sqrt();
            hmin = hmin.min(l);
            hmax = hmax.max(l);
        }
    }
    let surface = m.surface();
    let holes = m
        .boundary_loops
        .iter()
        .map(|lp| {
            let n = lp.vertices.len();
            let length = (0..n).map(|i| m.edge_length(lp.vertices[i], lp.vertices[(i + 1) % n])).sum();
            let (max_radial_error, circle_length) = match &surface {
                Some(s) => (
                    lp.vertices
                        .iter()
                        .map(|&v| (s.distance(&lp.center, &m.vertices[v]) - lp.radius).abs())
                        .fold(0.0, f64::max),
                    s.disk_boundary_length(lp.radius).ok(),
                ),
                None => (
                    lp.vertices
                        .iter()
                        .map(|&v| {
                            let p = m.vertices[v];
                            let d = [p[0] - lp.center[0], p[1] - lp.center[1], p[2] - lp.center[2]];
                            (dot(&d, &d).sqrt() - lp.radius).abs()
                        })
                        .fold(0.0, f64::max),
                    Some(2.0 * std::f64::consts::PI * lp.radius),
                ),
            };
            HoleResolution { segments: n, max_radial_error, length, circle_length }
        })
        .collect();
    let expected_euler = surface.map(|s| {
        let holes = if m.region == Region::Domain { m.boundary_loops.len() as i64 } else { 0 };
        s.euler_char() as i64 - holes
    });
    MeshQuality {
        n_vertices: m.n_vertices(),
        n_triangles: m.n_triangles(),
        min_angle_deg: amin,
        max_angle_deg: amax,
        h_max: hmax,
        h_min: hmin,
        euler_characteristic: m.euler_characteristic(),
        expected_euler,
        manifold: m.check_manifold().is_ok() && m.edge_counts().values().all(|&c| c <= 2),
        holes,
    }
}
