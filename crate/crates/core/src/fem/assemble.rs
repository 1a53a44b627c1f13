use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SparseSym;
use crate::mesh::{Region, TriMesh};
use crate::surface::{cross, dot, norm3, SurfacePoint};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    Area,
    Boundary,
}

/// A discrete measure: a nonnegative weight per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalMeasure {
    pub weights: Vec<f64>,
    pub support: Support,
    /// Name of the density this measure discretizes.
    pub label: String,
}

impl NodalMeasure {
    pub fn new(weights: Vec<f64>, support: Support, label: impl Into<String>) -> Self {
        Self { weights, support, label: label.into() }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * c).collect(), ..self.clone() }
    }

    /// Same measure with total mass 1.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.mass())
    }

    /// Extend with zero weights up to `n` vertices.
    pub fn padded(&self, n: usize) -> Self {
        let mut w = self.weights.clone();
        w.resize(n, 0.0);
        Self { weights: w, ..self.clone() }
    }

    /// `∫ u dμ`.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, u)| w * u).sum()
    }
}

/// Cotangent weights `(cot α + cot β) / 2` per triangle edge.
fn element_weights(m: &TriMesh, t: usize) -> Result<[(usize, usize, f64); 3]> {
    let tri = m.triangles[t];
    let p = m.corners(t);
    let twice_area = norm3(&cross(&sub(&p[1], &p[0]), &sub(&p[2], &p[0])));
    if !(0.5 * twice_area >= 1e-14) {
        return Err(Error::Assembly(format!("triangle {t} is degenerate (area {:.3e})", 0.5 * twice_area)));
    }
    let mut out = [(0, 0, 0.0); 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let e1 = sub(&p[i], &p[k]);
        let e2 = sub(&p[j], &p[k]);
        let cot = dot(&e1, &e2) / twice_area;
        out[k] = (tri[i], tri[j], 0.5 * cot);
    }
    Ok(out)
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Galerkin matrix of the Dirichlet energy for P1 elements.
pub fn assemble_stiffness(m: &TriMesh) -> Result<SparseSym> {
    assemble_stiffness_subset(m, 0..m.n_triangles())
}

/// Stiffness restricted to a set of triangles, on all vertices of `m`.
pub fn assemble_stiffness_subset(m: &TriMesh, tris: std::ops::Range<usize>) -> Result<SparseSym> {
    let weights = tris
        .into_par_iter()
        .map(|t| element_weights(m, t))
        .collect::<Result<Vec<_>>>()?;
    let n = m.n_vertices();
    let mut diag = vec![0.0; n];
    let mut off = Vec::with_capacity(3 * weights.len());
    for el in &weights {
        for &(i, j, w) in el {
            off.push((i, j, -w));
            diag[i] += w;
            diag[j] += w;
        }
    }
    Ok(SparseSym::from_parts(n, &off, &diag))
}

fn lumped_areas(m: &TriMesh) -> Vec<f64> {
    let mut a = vec![0.0; m.n_vertices()];
    for t in 0..m.n_triangles() {
        let third = m.geodesic_area(t) / 3.0;
        for &v in &m.triangles[t] {
            a[v] += third;
        }
    }
    a
}

/// Lumped mass of `f dv`: each vertex gets `f(v)` times a third of the
/// geodesic area of its triangles.
pub fn assemble_area_mass(m: &TriMesh, f: impl Fn(&SurfacePoint) -> f64) -> Result<NodalMeasure> {
    let values: Vec<f64> = m.vertices.iter().map(f).collect();
    assemble_area_mass_values(m, &values, "f")
}

pub fn assemble_area_mass_values(m: &TriMesh, f: &[f64], label: &str) -> Result<NodalMeasure> {
    if let Some(v) = f.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::Domain(format!("density is negative or undefined at vertex {v}: {}", f[v])));
    }
    let w = lumped_areas(m).into_iter().zip(f).map(|(a, f)| a * f).collect();
    Ok(NodalMeasure::new(w, Support::Area, label))
}

/// Trapezoidal lumping of `ρ ds` along the boundary.
pub fn assemble_boundary_mass(m: &TriMesh, rho: impl Fn(&SurfacePoint) -> f64) -> Result<NodalMeasure> {
    let values: Vec<f64> = m.vertices.iter().map(rho).collect();
    assemble_boundary_mass_values(m, &values, "rho")
}

pub fn assemble_boundary_mass_values(m: &TriMesh, rho: &[f64], label: &str) -> Result<NodalMeasure> {
    let edges = m.boundary_edges();
    if m.region == Region::Closed || edges.is_empty() {
        return Err(Error::Usage("boundary mass requires a mesh with boundary".into()));
    }
    let mut w = vec![0.0; m.n_vertices()];
    for (a, b) in edges {
        for v in [a, b] {
            if !(rho[v] >= 0.0) {
                return Err(Error::Domain(format!("boundary density is negative at vertex {v}: {}", rho[v])));
            }
        }
        let half = 0.5 * m.edge_length(a, b);
        w[a] += half * rho[a];
        w[b] += half * rho[b];
    }
    Ok(NodalMeasure::new(w, Support::Boundary, label))
}
