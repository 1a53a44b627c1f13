use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::closed::{mesh_closed_surface_with, DEFAULT_MAX_VERTICES};
use super::{BoundaryLoop, FilledMesh, Region, TriMesh};
use crate::packing::DomainSpec;
use crate::surface::{ModelSurface, SurfacePoint};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct MeshOptions {
    /// Background edge length.
    pub target_h: f64,
    /// Ratio between consecutive ring radii around a hole, in (1, 2].
    pub ring_ratio: f64,
    /// Minimum number of rings outside each hole boundary.
    pub rings_min: usize,
    /// Hole boundary edges are at most this fraction of the hole radius.
    pub hole_fraction: f64,
    pub max_vertices: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { target_h: 0.02, ring_ratio: 1.4, rings_min: 2, hole_fraction: 0.25, max_vertices: DEFAULT_MAX_VERTICES }
    }
}

impl MeshOptions {
    pub fn with_h(target_h: f64) -> Self {
        Self { target_h, ..Self::default() }
    }
}

/// Minimum number of segments on a hole boundary.
const MIN_SEGMENTS: usize = 16;

struct RingPlan {
    center: SurfacePoint,
    radius: f64,
    segments: usize,
    rings: Vec<f64>,
    match_radius: f64,
}

fn plan_rings(s: &ModelSurface, center: SurfacePoint, radius: f64, opts: &MeshOptions) -> Result<RingPlan> {
    let h = opts.target_h;
    let len = |t: f64| s.disk_boundary_length(t);
    let edge = h.min(opts.hole_fraction * radius);
    let segments = MIN_SEGMENTS.max((len(radius)? / edge).ceil() as usize);
    let q = opts.ring_ratio.min(1.0 + 2.0 * PI / segments as f64);
    let mut rings = vec![radius];
    loop {
        let last = *rings.last().unwrap();
        if rings.len() > opts.rings_min && len(last)? / segments as f64 >= 0.7 * h {
            break;
        }
        let next = last * q;
        if next >= 0.9 * s.injectivity_radius() {
            return Err(Error::Geometry(format!(
                "graded rings around a hole of radius {radius} reach the injectivity radius"
            )));
        }
        rings.push(next);
    }
    let match_radius = rings.last().unwrap() + 0.55 * h;
    Ok(RingPlan { center, radius, segments, rings, match_radius })
}

/// Triangulate the domain obtained by removing the holes of `d` from its
/// surface. Each hole gets graded rings of vertices in its geodesic polar
/// chart, stitched to the quasi-uniform background by a constrained
/// Delaunay triangulation.
pub fn mesh_domain(s: &ModelSurface, d: &DomainSpec, opts: &MeshOptions) -> Result<TriMesh> {
    if !(opts.ring_ratio > 1.0 && opts.ring_ratio <= 2.0) {
        return Err(Error::Domain(format!("ring_ratio {} outside (1, 2]", opts.ring_ratio)));
    }
    if !(opts.hole_fraction > 0.0) {
        return Err(Error::Domain(format!("hole_fraction {} must be positive", opts.hole_fraction)));
    }
    let bg = mesh_closed_surface_with(s, opts.target_h, opts.max_vertices)?;
    if d.k() == 0 {
        return Ok(bg);
    }
    let plans = d
        .centers()
        .iter()
        .zip(&d.radii)
        .map(|(c, &r)| plan_rings(s, *c, r, opts))
        .collect::<Result<Vec<_>>>()?;

    // Mark background vertices swallowed by each hole.
    let nv = bg.n_vertices();
    let mut owner: Vec<Option<usize>> = vec![None; nv];
    for (j, p) in plans.iter().enumerate() {
        for (v, x) in bg.vertices.iter().enumerate() {
            if s.distance(&p.center, x) < p.match_radius {
                if let Some(i) = owner[v] {
                    return Err(Error::Meshing {
                        hole: j,
                        reason: format!("matching disk overlaps that of hole {i}"),
                    });
                }
                owner[v] = Some(j);
            }
        }
        if !owner.contains(&Some(j)) {
            // Hole smaller than the background spacing: take the nearest vertex.
            let v = (0..nv)
                .min_by(|&a, &b| s.distance(&p.center, &bg.vertices[a]).total_cmp(&s.distance(&p.center, &bg.vertices[b])))
                .unwrap();
            if owner[v].is_some() {
                return Err(Error::Meshing { hole: j, reason: "no free background vertex nearby".into() });
            }
            owner[v] = Some(j);
        }
    }
    let vt = bg.vertex_triangles();
    let loops = (0..plans.len())
        .map(|j| carve(&bg, &vt, &mut owner, j))
        .collect::<Result<Vec<_>>>()?;
    let mut on_loop: HashMap<usize, usize> = HashMap::new();
    for (j, lp) in loops.iter().enumerate() {
        for &v in lp {
            if let Some(i) = owner[v] {
                return Err(Error::Meshing { hole: j, reason: format!("boundary vertex {v} swallowed by hole {i}") });
            }
            if let Some(i) = on_loop.insert(v, j) {
                return Err(Error::Meshing { hole: j, reason: format!("shares boundary vertex {v} with hole {i}") });
            }
        }
    }

    // Renumber the kept background vertices.
    let mut new_id = vec![usize::MAX; nv];
    let mut vertices = Vec::new();
    for v in 0..nv {
        if owner[v].is_none() {
            new_id[v] = vertices.len();
            vertices.push(bg.vertices[v]);
        }
    }
    let mut triangles: Vec<[usize; 3]> = bg
        .triangles
        .iter()
        .filter(|t| t.iter().all(|&v| owner[v].is_none()))
        .map(|t| [new_id[t[0]], new_id[t[1]], new_id[t[2]]])
        .collect();

    let patches = plans
        .par_iter()
        .zip(&loops)
        .enumerate()
        .map(|(j, (p, lp))| stitch_patch(s, &bg, p, lp).map_err(|reason| Error::Meshing { hole: j, reason }))
        .collect::<Result<Vec<_>>>()?;

    let mut boundary_loops = Vec::with_capacity(plans.len());
    for ((p, lp), patch) in plans.iter().zip(&loops).zip(patches) {
        let base = vertices.len();
        vertices.extend(patch.new_vertices);
        let map = |local: usize| {
            if local < lp.len() {
                new_id[lp[local]]
            } else {
                base + local - lp.len()
            }
        };
        for t in patch.triangles {
            triangles.push([map(t[0]), map(t[1]), map(t[2])]);
        }
        boundary_loops.push(BoundaryLoop {
            center: p.center,
            radius: p.radius,
            vertices: (base..base + p.segments).collect(),
        });
    }
    if vertices.len() > opts.max_vertices {
        return Err(Error::Capacity(format!(
            "domain mesh has {} vertices, budget is {}",
            vertices.len(),
            opts.max_vertices
        )));
    }
    let mesh = TriMesh::new(vertices, triangles, boundary_loops, bg.geometry.clone(), Region::Domain);
    mesh.check_manifold().map_err(|e| Error::Meshing { hole: 0, reason: e.to_string() })?;
    let expected = s.euler_char() as i64 - d.k() as i64;
    if mesh.euler_characteristic() != expected {
        return Err(Error::Meshing {
            hole: 0,
            reason: format!("Euler characteristic {} instead of {expected}", mesh.euler_characteristic()),
        });
    }
    Ok(mesh)
}

/// Grow the removed region of hole `j` until its boundary is one simple
/// cycle, then return that cycle oriented counter-clockwise about the hole.
fn carve(bg: &TriMesh, vt: &[Vec<usize>], owner: &mut [Option<usize>], j: usize) -> Result<Vec<usize>> {
    let err = |reason: String| Error::Meshing { hole: j, reason };
    for _ in 0..1000 {
        let mut removed: Vec<usize> = Vec::new();
        for v in 0..owner.len() {
            if owner[v] == Some(j) {
                removed.extend(&vt[v]);
            }
        }
        removed.sort_unstable();
        removed.dedup();
        let mut directed: HashMap<(usize, usize), ()> = HashMap::new();
        for &t in &removed {
            let tri = bg.triangles[t];
            for e in 0..3 {
                directed.insert((tri[e], tri[(e + 1) % 3]), ());
            }
        }
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                next.entry(a).or_default().push(b);
            }
        }
        for &t in &removed {
            for &v in &bg.triangles[t] {
                if let Some(i) = owner[v] {
                    if i != j {
                        return Err(err(format!(
                            "removed region touches hole {i}; target_h is too coarse for the hole spacing"
                        )));
                    }
                }
            }
        }
        // Vertices with all triangles removed but not on the boundary.
        let mut grow: Vec<usize> = Vec::new();
        for &t in &removed {
            for &v in &bg.triangles[t] {
                if owner[v].is_none() && !next.contains_key(&v) {
                    grow.push(v);
                }
            }
        }
        // Pinch points where the boundary touches itself.
        grow.extend(next.iter().filter(|(_, n)| n.len() > 1).map(|(&v, _)| v));
        if grow.is_empty() {
            let start = *next.keys().min().ok_or_else(|| err("empty boundary".into()))?;
            let mut cycle = vec![start];
            let mut v = next[&start][0];
            while v != start {
                if cycle.len() > next.len() {
                    return Err(err("boundary is not a cycle".into()));
                }
                cycle.push(v);
                v = *next.get(&v).ok_or_else(|| err("open boundary".into()))?.first().unwrap();
            }
            if cycle.len() == next.len() {
                return Ok(cycle);
            }
            // Several cycles: the removed region encloses kept islands.
            // Absorb every cycle except the longest.
            let mut seen: HashMap<usize, usize> = HashMap::new();
            let mut cycles: Vec<Vec<usize>> = Vec::new();
            let mut keys: Vec<usize> = next.keys().copied().collect();
            keys.sort_unstable();
            for s in keys {
                if seen.contains_key(&s) {
                    continue;
                }
                let mut c = vec![s];
                seen.insert(s, cycles.len());
                let mut v = next[&s][0];
                while v != s {
                    seen.insert(v, cycles.len());
                    c.push(v);
                    v = next[&v][0];
                }
                cycles.push(c);
            }
            let longest = (0..cycles.len()).max_by_key(|&i| cycles[i].len()).unwrap();
            for (i, c) in cycles.iter().enumerate() {
                if i != longest {
                    grow.extend(c);
                }
            }
        }
        for v in grow {
            if owner[v].is_some_and(|i| i != j) {
                return Err(err("growth collides with another hole".into()));
            }
            owner[v] = Some(j);
        }
    }
    Err(err("carving did not converge".into()))
}

struct Patch {
    /// New vertices (boundary ring first), appended after the loop vertices.
    new_vertices: Vec<SurfacePoint>,
    /// Triangles in local numbering: loop vertices first, then new vertices.
    triangles: Vec<[usize; 3]>,
}

fn stitch_patch(s: &ModelSurface, bg: &TriMesh, p: &RingPlan, outer: &[usize]) -> std::result::Result<Patch, String> {
    let n = p.segments;
    let mut chart: Vec<[f64; 2]> = outer.iter().map(|&v| s.log_map(&p.center, &bg.vertices[v])).collect();
    let mut new_vertices = Vec::new();
    for (m, &rho) in p.rings.iter().enumerate() {
        let phase = PI * m as f64 / n as f64;
        for i in 0..n {
            let a = phase + 2.0 * PI * i as f64 / n as f64;
            let x = [rho * a.cos(), rho * a.sin()];
            chart.push(x);
            new_vertices.push(s.exp_map(&p.center, x));
        }
    }
    for x in &chart[..outer.len()] {
        if x[0].hypot(x[1]) <= *p.rings.last().unwrap() {
            return Err("background loop intrudes into the graded rings".into());
        }
    }
    let hole: Vec<usize> = (outer.len()..outer.len() + n).collect();
    let outer_ids: Vec<usize> = (0..outer.len()).collect();
    let triangles = constrained_patch(&chart, &[&outer_ids, &hole], |c| {
        inside(&chart, &outer_ids, c) && !inside(&chart, &hole, c)
    })?;
    Ok(Patch { new_vertices, triangles })
}

/// Constrained Delaunay triangulation of `pts` with the given closed
/// polygons as constraints, keeping faces whose centroid passes `keep`.
fn constrained_patch(
    pts: &[[f64; 2]],
    polygons: &[&[usize]],
    keep: impl Fn([f64; 2]) -> bool,
) -> std::result::Result<Vec<[usize; 3]>, String> {
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(pts.len());
    let mut local: HashMap<usize, usize> = HashMap::new();
    for (i, x) in pts.iter().enumerate() {
        let h = cdt.insert(Point2::new(x[0], x[1])).map_err(|e| format!("insertion failed: {e:?}"))?;
        if local.insert(h.index(), i).is_some() {
            return Err(format!("duplicate chart point {i}"));
        }
        handles.push(h);
    }
    for poly in polygons {
        for w in 0..poly.len() {
            let (a, b) = (poly[w], poly[(w + 1) % poly.len()]);
            let (ha, hb) = (handles[a], handles[b]);
            if cdt.exists_constraint(ha, hb) {
                continue;
            }
            let added = cdt.try_add_constraint(ha, hb);
            if added.len() != 1 {
                return Err(format!("constraint edge ({a}, {b}) could not be inserted"));
            }
        }
    }
    let mut out = Vec::new();
    for f in cdt.inner_faces() {
        let [a, b, c] = f.vertices().map(|v| local[&v.fix().index()]);
        let centroid = [
            (pts[a][0] + pts[b][0] + pts[c][0]) / 3.0,
            (pts[a][1] + pts[b][1] + pts[c][1]) / 3.0,
        ];
        if !keep(centroid) {
            continue;
        }
        let area = (pts[b][0] - pts[a][0]) * (pts[c][1] - pts[a][1]) - (pts[b][1] - pts[a][1]) * (pts[c][0] - pts[a][0]);
        // Collinear loop vertices give zero-area faces whose centroid sits
        // on the constraint itself.
        let longest = [(a, b), (b, c), (c, a)]
            .iter()
            .map(|&(p, q)| (pts[p][0] - pts[q][0]).powi(2) + (pts[p][1] - pts[q][1]).powi(2))
            .fold(0.0, f64::max);
        if area.abs() <= 1e-9 * longest {
            continue;
        }
        out.push(if area > 0.0 { [a, b, c] } else { [a, c, b] });
    }
    Ok(out)
}

/// Even-odd point-in-polygon test.
fn inside(pts: &[[f64; 2]], poly: &[usize], x: [f64; 2]) -> bool {
    let mut c = false;
    for w in 0..poly.len() {
        let (p, q) = (pts[poly[w]], pts[poly[(w + 1) % poly.len()]]);
        if (p[1] > x[1]) != (q[1] > x[1]) {
            let t = (x[1] - p[1]) / (q[1] - p[1]);
            if x[0] < p[0] + t * (q[0] - p[0]) {
                c = !c;
            }
        }
    }
    c
}

/// Close every hole of a domain mesh with a Delaunay disk of concentric
/// rings, giving a closed mesh whose leading vertices and triangles are
/// those of the domain.
pub fn fill_holes(domain: &TriMesh) -> Result<FilledMesh> {
    if domain.region != Region::Domain {
        return Err(Error::Usage("fill_holes expects a domain mesh".into()));
    }
    let s = domain
        .surface()
        .ok_or_else(|| Error::Usage("fill_holes needs a sphere or torus mesh".into()))?;
    let fills = domain
        .boundary_loops
        .par_iter()
        .enumerate()
        .map(|(j, lp)| fill_one(&s, domain, lp).map_err(|reason| Error::Meshing { hole: j, reason }))
        .collect::<Result<Vec<_>>>()?;
    let mut vertices = domain.vertices.clone();
    let mut triangles = domain.triangles.clone();
    for (lp, patch) in domain.boundary_loops.iter().zip(fills) {
        let base = vertices.len();
        vertices.extend(patch.new_vertices);
        let n = lp.vertices.len();
        for t in patch.triangles {
            triangles.push(t.map(|v| if v < n { lp.vertices[v] } else { base + v - n }));
        }
    }
    let mesh = TriMesh::new(vertices, triangles, Vec::new(), domain.geometry.clone(), Region::Closed);
    mesh.check_manifold()?;
    if mesh.euler_characteristic() != s.euler_char() as i64 {
        return Err(Error::Meshing {
            hole: 0,
            reason: format!("filled mesh has Euler characteristic {}", mesh.euler_characteristic()),
        });
    }
    Ok(FilledMesh {
        mesh,
        n_domain_vertices: domain.n_vertices(),
        n_domain_triangles: domain.n_triangles(),
        holes: domain.boundary_loops.clone(),
    })
}

fn fill_one(s: &ModelSurface, domain: &TriMesh, lp: &BoundaryLoop) -> std::result::Result<Patch, String> {
    let n = lp.vertices.len();
    let mut chart: Vec<[f64; 2]> = lp.vertices.iter().map(|&v| s.log_map(&lp.center, &domain.vertices[v])).collect();
    let r = lp.radius;
    let step = 2.0 * PI * r / n as f64 * 0.5 * 3f64.sqrt();
    let mut new_vertices = Vec::new();
    let mut rho = r - step;
    let mut m = 1;
    while rho > 0.6 * step {
        let count = ((n as f64 * rho / r).round() as usize).max(3);
        if count < 6 {
            break;
        }
        let phase = PI * m as f64 / count as f64;
        for i in 0..count {
            let a = phase + 2.0 * PI * i as f64 / count as f64;
            let x = [rho * a.cos(), rho * a.sin()];
            chart.push(x);
            new_vertices.push(s.exp_map(&lp.center, x));
        }
        rho -= step;
        m += 1;
    }
    chart.push([0.0, 0.0]);
    new_vertices.push(s.exp_map(&lp.center, [0.0, 0.0]));
    let ring: Vec<usize> = (0..n).collect();
    let triangles = constrained_patch(&chart, &[&ring], |c| inside(&chart, &ring, c))?;
    Ok(Patch { new_vertices, triangles })
}
