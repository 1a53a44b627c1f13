//! Triangulations of closed model surfaces and of punctured domains.

mod closed;
mod domain;
mod io;
mod quality;

use std::collections::HashMap;

use crate::surface::{cross, dot, norm3, sphere_radius, sub, Lattice, ModelSurface, SurfacePoint};
use crate::{Error, Result};

pub use closed::{icosphere, mesh_closed_surface, mesh_closed_surface_with, planar_annulus, planar_disk, torus_grid};
pub use domain::{fill_holes, mesh_domain, MeshOptions};
pub use io::{read_mesh, write_mesh, MeshFile};
pub use quality::{mesh_quality, HoleResolution, MeshQuality};

/// Ambient geometry used to turn vertex positions into flat triangles.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// Vertices on the unit-area round sphere; triangles are flat chords.
    Sphere,
    /// Vertices in the fundamental domain; edges use the shortest lattice image.
    Torus(Lattice),
    Plane,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Closed,
    Domain,
}

/// An ordered cycle of boundary vertices sampling a geodesic circle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLoop {
    pub center: SurfacePoint,
    pub radius: f64,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<SurfacePoint>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_loops: Vec<BoundaryLoop>,
    pub geometry: Geometry,
    pub region: Region,
    pub h_max: f64,
}

/// Closed mesh obtained by triangulating the holes of a domain mesh. The
/// first `n_domain_vertices` vertices and `n_domain_triangles` triangles are
/// exactly those of the domain mesh.
#[derive(Clone, Debug)]
pub struct FilledMesh {
    pub mesh: TriMesh,
    pub n_domain_vertices: usize,
    pub n_domain_triangles: usize,
    pub holes: Vec<BoundaryLoop>,
}

impl FilledMesh {
    /// The domain part as a standalone mesh.
    pub fn domain(&self) -> TriMesh {
        let mut m = TriMesh {
            vertices: self.mesh.vertices[..self.n_domain_vertices].to_vec(),
            triangles: self.mesh.triangles[..self.n_domain_triangles].to_vec(),
            boundary_loops: self.holes.clone(),
            geometry: self.mesh.geometry.clone(),
            region: Region::Domain,
            h_max: 0.0,
        };
        m.h_max = m.longest_edge();
        m
    }
}

impl TriMesh {
    pub(crate) fn new(
        vertices: Vec<SurfacePoint>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Vec<BoundaryLoop>,
        geometry: Geometry,
        region: Region,
    ) -> Self {
        let mut m = Self { vertices, triangles, boundary_loops, geometry, region, h_max: 0.0 };
        m.h_max = m.longest_edge();
        m
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// The model surface this mesh discretizes, if any.
    pub fn surface(&self) -> Option<ModelSurface> {
        match &self.geometry {
            Geometry::Sphere => Some(ModelSurface::sphere()),
            Geometry::Torus(l) => Some(ModelSurface::torus(*l)),
            Geometry::Plane => None,
        }
    }

    /// Vector from vertex `i` to vertex `j`, unwrapped on tori.
    pub fn edge_vector(&self, i: usize, j: usize) -> [f64; 3] {
        let (p, q) = (&self.vertices[i], &self.vertices[j]);
        match &self.geometry {
            Geometry::Torus(l) => {
                let d = l.min_image([q[0] - p[0], q[1] - p[1]]);
                [d[0], d[1], 0.0]
            }
            _ => sub(q, p),
        }
    }

    /// Corner positions of triangle `t` in a common unwrapped frame.
    pub fn corners(&self, t: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.triangles[t];
        let p = self.vertices[a];
        let u = self.edge_vector(a, b);
        let v = self.edge_vector(a, c);
        [p, [p[0] + u[0], p[1] + u[1], p[2] + u[2]], [p[0] + v[0], p[1] + v[1], p[2] + v[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * norm3(&cross(&self.edge_vector(a, b), &self.edge_vector(a, c)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Area of the geodesic triangle spanned by triangle `t` on the model
    /// surface. Differs from [`TriMesh::triangle_area`] only on the sphere,
    /// where the spherical triangles of a closed mesh tile it exactly.
    pub fn geodesic_area(&self, t: usize) -> f64 {
        if self.geometry != Geometry::Sphere {
            return self.triangle_area(t);
        }
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let r = sphere_radius();
        let num = dot(&a, &cross(&b, &c)).abs();
        let den = r * r * r + r * (dot(&a, &b) + dot(&b, &c) + dot(&c, &a));
        2.0 * num.atan2(den) * r * r
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        norm3(&self.edge_vector(i, j))
    }

    pub(crate) fn longest_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for &[a, b, c] in &self.triangles {
            h = h.max(self.edge_length(a, b)).max(self.edge_length(b, c)).max(self.edge_length(c, a));
        }
        h
    }

    /// Undirected edges with the number of incident triangles.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    /// Directed boundary edges, oriented as in their triangle, sorted.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let counts = self.edge_counts();
        let mut out = Vec::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if counts[&(a.min(b), a.max(b))] == 1 {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for (a, b) in self.boundary_edges() {
            mask[a] = true;
            mask[b] = true;
        }
        mask
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.edge_counts().len() as i64 + self.n_triangles() as i64
    }

    /// Check that every edge has one or two triangles and that orientation is
    /// consistent (each directed edge used at most once).
    pub fn check_manifold(&self) -> Result<()> {
        let mut directed = HashMap::with_capacity(3 * self.triangles.len());
        for (ti, t) in self.triangles.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || t.iter().any(|&v| v >= self.n_vertices()) {
                return Err(Error::Assembly(format!("triangle {ti} has invalid vertices {t:?}")));
            }
            for e in 0..3 {
                if directed.insert((t[e], t[(e + 1) % 3]), ti).is_some() {
                    return Err(Error::Assembly(format!(
                        "edge ({}, {}) is used twice with the same orientation",
                        t[e],
                        t[(e + 1) % 3]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }
}
