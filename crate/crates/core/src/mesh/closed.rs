use std::collections::HashMap;
use std::f64::consts::PI;

use super::{BoundaryLoop, FilledMesh, Geometry, Region, TriMesh};
use crate::surface::{cross, dot, sphere_radius, sub, Lattice, ModelSurface, SurfaceKind};
use crate::{Error, Result};

/// Default vertex budget for generated meshes.
pub(crate) const DEFAULT_MAX_VERTICES: usize = 500_000;

/// Arc length of an icosahedron edge on the unit-area sphere.
fn icosahedron_arc() -> f64 {
    sphere_radius() * (1.0 / 5f64.sqrt()).acos()
}

/// Quasi-uniform closed mesh with edges close to `target_h`.
pub fn mesh_closed_surface(s: &ModelSurface, target_h: f64) -> Result<TriMesh> {
    mesh_closed_surface_with(s, target_h, DEFAULT_MAX_VERTICES)
}

pub fn mesh_closed_surface_with(s: &ModelSurface, target_h: f64, max_vertices: usize) -> Result<TriMesh> {
    if !(target_h > 0.0) || target_h >= s.injectivity_radius() {
        return Err(Error::Capacity(format!(
            "target_h = {target_h} must lie in (0, {}) for this surface",
            s.injectivity_radius()
        )));
    }
    match s.kind() {
        SurfaceKind::Sphere => {
            // Projection stretches edges near face centres by about 15%.
            let n = (1.15 * icosahedron_arc() / target_h).ceil().max(1.0) as usize;
            let v = 10 * n * n + 2;
            if v > max_vertices {
                return Err(Error::Capacity(format!(
                    "sphere mesh at h = {target_h} needs {v} vertices, budget is {max_vertices}"
                )));
            }
            Ok(icosphere(n))
        }
        SurfaceKind::FlatTorus => {
            let l = *s.lattice().expect("torus has a lattice");
            let [a, b] = l.basis();
            let n1 = ((a[0].hypot(a[1])) / target_h).ceil().max(3.0) as usize;
            let n2 = ((b[0].hypot(b[1])) / target_h).ceil().max(3.0) as usize;
            if n1 * n2 > max_vertices {
                return Err(Error::Capacity(format!(
                    "torus mesh at h = {target_h} needs {} vertices, budget is {max_vertices}",
                    n1 * n2
                )));
            }
            Ok(torus_grid(l, n1, n2))
        }
    }
}

/// Icosahedron with every edge split into `frequency` segments, projected to
/// the unit-area sphere.
pub fn icosphere(frequency: usize) -> TriMesh {
    let n = frequency.max(1);
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut base = Vec::with_capacity(12);
    for &(a, b) in &[(1.0, phi), (-1.0, phi), (1.0, -phi), (-1.0, -phi)] {
        base.push([0.0, a, b]);
        base.push([a, b, 0.0]);
        base.push([b, 0.0, a]);
    }
    let mut faces = Vec::with_capacity(20);
    let close = |p: &[f64; 3], q: &[f64; 3]| (dot(&sub(p, q), &sub(p, q)) - 4.0).abs() < 1e-9;
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if close(&base[i], &base[j]) && close(&base[j], &base[k]) && close(&base[i], &base[k]) {
                    let nrm = cross(&sub(&base[j], &base[i]), &sub(&base[k], &base[i]));
                    let c = [
                        base[i][0] + base[j][0] + base[k][0],
                        base[i][1] + base[j][1] + base[k][1],
                        base[i][2] + base[j][2] + base[k][2],
                    ];
                    faces.push(if dot(&nrm, &c) > 0.0 { [i, j, k] } else { [i, k, j] });
                }
            }
        }
    }
    debug_assert_eq!(faces.len(), 20);

    // Points are keyed by their integer barycentric weights on the base
    // vertices, so points shared between faces coincide exactly.
    let r = sphere_radius();
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut vertices = Vec::with_capacity(10 * n * n + 2);
    let mut vertex = |w: [(usize, usize); 3]| -> usize {
        let mut key: Vec<(usize, usize)> = w.into_iter().filter(|&(_, c)| c > 0).collect();
        key.sort_unstable();
        *index.entry(key.clone()).or_insert_with(|| {
            let mut p = [0.0; 3];
            for &(v, c) in &key {
                for d in 0..3 {
                    p[d] += c as f64 * base[v][d];
                }
            }
            let s = r / dot(&p, &p).sqrt();
            vertices.push([p[0] * s, p[1] * s, p[2] * s]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(20 * n * n);
    for &[a, b, c] in &faces {
        let mut grid = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                grid[i][j] = vertex([(a, n - i - j), (b, i), (c, j)]);
            }
        }
        for i in 0..n {
            for j in 0..n - i {
                triangles.push([grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                if i + j + 1 < n {
                    triangles.push([grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                }
            }
        }
    }
    TriMesh::new(vertices, triangles, Vec::new(), Geometry::Sphere, Region::Closed)
}

/// Structured periodic grid with `n1 x n2` vertices on the torus of `lattice`.
pub fn torus_grid(lattice: Lattice, n1: usize, n2: usize) -> TriMesh {
    let [a, b] = lattice.basis();
    let acute = a[0] * b[0] + a[1] * b[1] >= 0.0;
    let id = |i: usize, j: usize| (i % n1) * n2 + (j % n2);
    let mut vertices = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let p = lattice.point(i as f64 / n1 as f64, j as f64 / n2 as f64);
            vertices.push([p[0], p[1], 0.0]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            if acute {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            } else {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            }
        }
    }
    TriMesh::new(vertices, triangles, Vec::new(), Geometry::Torus(lattice), Region::Closed)
}

/// Concentric rings of `6m` points at radii `m * radius / rings`, joined ring
/// to ring. Returns the vertices, triangles and the first vertex of each ring.
fn ring_disk(radius: f64, rings: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>, Vec<usize>) {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut starts = vec![0];
    for m in 1..=rings {
        starts.push(vertices.len());
        let rho = radius * m as f64 / rings as f64;
        let count = 6 * m;
        for i in 0..count {
            let a = 2.0 * PI * i as f64 / count as f64;
            vertices.push([rho * a.cos(), rho * a.sin(), 0.0]);
        }
    }
    let mut triangles = Vec::new();
    for i in 0..6 {
        triangles.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for m in 2..=rings {
        let (inner, outer) = (starts[m - 1], starts[m]);
        let (na, nb) = (6 * (m - 1), 6 * m);
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let a_next = (i + 1) as f64 / na as f64;
            let b_next = (j + 1) as f64 / nb as f64;
            let ai = inner + i % na;
            let bj = outer + j % nb;
            if j == nb || (i < na && a_next < b_next) {
                triangles.push([ai, bj, inner + (i + 1) % na]);
                i += 1;
            } else {
                triangles.push([ai, bj, outer + (j + 1) % nb]);
                j += 1;
            }
        }
    }
    (vertices, triangles, starts)
}

/// Flat disk of the given radius with edges close to `target_h`.
pub fn planar_disk(radius: f64, target_h: f64) -> Result<TriMesh> {
    if !(radius > 0.0 && target_h > 0.0 && target_h < radius) {
        return Err(Error::Domain(format!("disk radius {radius} with h = {target_h}")));
    }
    let rings = (radius / target_h).ceil() as usize;
    let (vertices, triangles, starts) = ring_disk(radius, rings);
    let boundary = BoundaryLoop {
        center: [0.0; 3],
        radius,
        vertices: (starts[rings]..vertices.len()).collect(),
    };
    Ok(TriMesh::new(vertices, triangles, vec![boundary], Geometry::Plane, Region::Domain))
}

/// The annulus `1 <= |x| <= 2` with the unit disk as its filled hole.
pub fn planar_annulus(target_h: f64) -> Result<FilledMesh> {
    if !(target_h > 0.0 && target_h < 0.5) {
        return Err(Error::Domain(format!("annulus mesh with h = {target_h}")));
    }
    let half = (1.0 / target_h).ceil() as usize;
    let (vertices, triangles, starts) = ring_disk(2.0, 2 * half);
    let split = starts[half];
    // Renumber so the annulus (rings half..) comes first.
    let n_out = vertices.len() - split;
    let map = |v: usize| if v >= split { v - split } else { v + n_out };
    let mut new_vertices = vertices[split..].to_vec();
    new_vertices.extend_from_slice(&vertices[..split]);
    let (mut outer, mut inner) = (Vec::new(), Vec::new());
    for t in &triangles {
        let mapped = [map(t[0]), map(t[1]), map(t[2])];
        if t.iter().all(|&v| v >= split) {
            outer.push(mapped);
        } else {
            inner.push(mapped);
        }
    }
    let n_domain_triangles = outer.len();
    outer.extend(inner);
    let hole = BoundaryLoop { center: [0.0; 3], radius: 1.0, vertices: (0..6 * half).collect() };
    Ok(FilledMesh {
        mesh: TriMesh::new(new_vertices, outer, Vec::new(), Geometry::Plane, Region::Domain),
        n_domain_vertices: n_out,
        n_domain_triangles,
        holes: vec![hole],
    })
}
