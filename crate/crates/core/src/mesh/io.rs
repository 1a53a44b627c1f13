//! Line-oriented text format:
//!
//! ```text
//! SURFMESH 1
//! # surface sphere | torus a1x a1y a2x a2y | plane
//! # hole <id> <cx> <cy> <cz> <radius>
//! V E_b F H
//! x y z boundary_tag hole_id      (V lines, hole_id -1 off the boundary)
//! i j k                           (F lines, 0-based)
//! ```
//!
//! Boundary loops are rebuilt from the hole ids and the boundary edges.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryLoop, Geometry, Region, TriMesh};
use crate::surface::Lattice;
use crate::{Error, Result};

/// Render a mesh in the text format.
pub struct MeshFile;

impl MeshFile {
    pub fn to_string(m: &TriMesh) -> String {
        let mut hole_of = vec![-1i64; m.n_vertices()];
        for (j, lp) in m.boundary_loops.iter().enumerate() {
            for &v in &lp.vertices {
                hole_of[v] = j as i64;
            }
        }
        let boundary = m.boundary_mask();
        let n_boundary_edges = m.boundary_edges().len();
        let mut out = String::new();
        out.push_str("SURFMESH 1\n");
        match &m.geometry {
            Geometry::Sphere => out.push_str("# surface sphere\n"),
            Geometry::Plane => out.push_str("# surface plane\n"),
            Geometry::Torus(l) => {
                let [a, b] = l.basis();
                writeln!(out, "# surface torus {:?} {:?} {:?} {:?}", a[0], a[1], b[0], b[1]).unwrap();
            }
        }
        for (j, lp) in m.boundary_loops.iter().enumerate() {
            let c = lp.center;
            writeln!(out, "# hole {j} {:?} {:?} {:?} {:?}", c[0], c[1], c[2], lp.radius).unwrap();
        }
        writeln!(out, "{} {} {} {}", m.n_vertices(), n_boundary_edges, m.n_triangles(), m.boundary_loops.len()).unwrap();
        for (v, p) in m.vertices.iter().enumerate() {
            writeln!(out, "{:?} {:?} {:?} {} {}", p[0], p[1], p[2], boundary[v] as u8, hole_of[v]).unwrap();
        }
        for t in &m.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<TriMesh> {
        let perr = |line: usize, msg: &str| Error::Parse(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, "SURFMESH 1")) => {}
            _ => return Err(perr(1, "expected header 'SURFMESH 1'")),
        }
        let mut geometry = Geometry::Plane;
        let mut holes: Vec<(usize, [f64; 3], f64)> = Vec::new();
        let mut body = Vec::new();
        for (no, l) in lines {
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                let num = |s: &str| s.parse::<f64>().map_err(|_| perr(no, "bad number"));
                match f.as_slice() {
                    ["surface", "sphere"] => geometry = Geometry::Sphere,
                    ["surface", "plane"] => geometry = Geometry::Plane,
                    ["surface", "torus", a, b, c, d] => {
                        geometry = Geometry::Torus(Lattice::new([num(a)?, num(b)?], [num(c)?, num(d)?])?)
                    }
                    ["hole", id, x, y, z, r] => {
                        let id = id.parse::<usize>().map_err(|_| perr(no, "bad hole id"))?;
                        holes.push((id, [num(x)?, num(y)?, num(z)?], num(r)?));
                    }
                    _ => {}
                }
                continue;
            }
            body.push((no, l));
        }
        let mut body = body.into_iter();
        let (no, counts) = body.next().ok_or_else(|| perr(0, "missing counts line"))?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| perr(no, "bad count")))
            .collect::<Result<_>>()?;
        let [nv, _eb, nf, nh] = counts[..] else {
            return Err(perr(no, "counts line must be 'V E_b F H'"));
        };
        let mut vertices = Vec::with_capacity(nv);
        let mut hole_of = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (no, l) = body.next().ok_or_else(|| perr(0, "truncated vertex list"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 5 {
                return Err(perr(no, "vertex line needs 5 fields"));
            }
            let c = |s: &str| s.parse::<f64>().map_err(|_| perr(no, "bad coordinate"));
            vertices.push([c(f[0])?, c(f[1])?, c(f[2])?]);
            hole_of.push(f[4].parse::<i64>().map_err(|_| perr(no, "bad hole id"))?);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (no, l) = body.next().ok_or_else(|| perr(0, "truncated triangle list"))?;
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| perr(no, "bad index")))
                .collect::<Result<_>>()?;
            if f.len() != 3 || f.iter().any(|&v| v >= nv) {
                return Err(perr(no, "triangle line needs 3 valid indices"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let region = if nh > 0 || geometry == Geometry::Plane { Region::Domain } else { Region::Closed };
        let mut m = TriMesh::new(vertices, triangles, Vec::new(), geometry, region);
        // Rebuild ordered loops by walking boundary edges of each hole.
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (a, b) in m.boundary_edges() {
            next.insert(a, b);
        }
        holes.sort_by_key(|h| h.0);
        for j in 0..nh {
            let (center, radius) = holes
                .iter()
                .find(|h| h.0 == j)
                .map(|h| (h.1, h.2))
                .unwrap_or(([f64::NAN; 3], f64::NAN));
            let start = (0..nv)
                .find(|&v| hole_of[v] == j as i64)
                .ok_or_else(|| Error::Parse(format!("hole {j} has no vertices")))?;
            let mut cycle = vec![start];
            let mut v = *next.get(&start).ok_or_else(|| Error::Parse(format!("hole {j} is not on the boundary")))?;
            while v != start {
                if cycle.len() > nv {
                    return Err(Error::Parse(format!("hole {j} boundary does not close")));
                }
                cycle.push(v);
                v = next[&v];
            }
            // Hole loops are stored in increasing polar angle about the hole,
            // opposite to the induced boundary orientation.
            if m.geometry != Geometry::Plane {
                cycle.reverse();
                cycle.rotate_right(1);
            }
            m.boundary_loops.push(BoundaryLoop { center, radius, vertices: cycle });
        }
        Ok(m)
    }
}

pub fn write_mesh(m: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, MeshFile::to_string(m)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    MeshFile::parse(&text)
}
