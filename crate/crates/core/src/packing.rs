//! Well-separated, well-covering centers and the punctured-domain
//! specification built on them.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::surface::{ModelSurface, SurfaceDescriptor, SurfaceKind, SurfacePoint};
use crate::{Error, Result};

/// Separation constant: greedy packings satisfy `min_separation >= 2 c0 / sqrt(k)`.
pub fn separation_constant() -> f64 {
    1.0 / (5.0 * PI).sqrt()
}

/// Covering constant: `covering_radius <= C0 / sqrt(k)`.
pub fn covering_constant() -> f64 {
    8.0 / (3.0 * PI).sqrt()
}

#[derive(Clone, Debug)]
pub struct PackingOptions {
    /// Number of quasi-uniform candidate and validation samples.
    pub samples: usize,
    /// Largest admissible number of centers.
    pub max_points: usize,
}

impl Default for PackingOptions {
    fn default() -> Self {
        Self { samples: 100_000, max_points: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct DiskPacking {
    pub surface: ModelSurface,
    pub centers: Vec<SurfacePoint>,
    /// Radii for which the doubled disks are pairwise disjoint.
    pub radii: Vec<f64>,
    pub min_separation: f64,
    /// Largest distance from a validation sample to the nearest center.
    pub covering_radius: f64,
    /// Spacing of the validation samples; the true covering radius exceeds
    /// the estimate by at most this much.
    pub covering_tolerance: f64,
    pub seed: u64,
}

impl DiskPacking {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn empty(surface: ModelSurface) -> Self {
        Self {
            surface,
            centers: Vec::new(),
            radii: Vec::new(),
            min_separation: f64::INFINITY,
            covering_radius: f64::INFINITY,
            covering_tolerance: 0.0,
            seed: 0,
        }
    }
}

/// Greedy farthest-point selection of `k` centers over a dense quasi-uniform
/// candidate set, starting from a random point drawn from `seed`.
pub fn select_separated_points(s: &ModelSurface, k: usize, seed: u64) -> Result<DiskPacking> {
    select_separated_points_with(s, k, seed, &PackingOptions::default())
}

pub fn select_separated_points_with(
    s: &ModelSurface,
    k: usize,
    seed: u64,
    opts: &PackingOptions,
) -> Result<DiskPacking> {
    if k == 0 {
        return Err(Error::Usage("packing needs at least one center".into()));
    }
    if k > opts.max_points {
        return Err(Error::Capacity(format!(
            "k = {k} exceeds the configured maximum of {} centers",
            opts.max_points
        )));
    }
    let (samples, spacing) = s.quasi_uniform_samples(opts.samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = s.random_point(&mut rng);
    let mut centers = vec![first];
    let mut nearest: Vec<f64> = samples.iter().map(|q| s.distance(&first, q)).collect();
    while centers.len() < k {
        let (best, _) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        let c = samples[best];
        for (d, q) in nearest.iter_mut().zip(&samples) {
            *d = d.min(s.distance(&c, q));
        }
        centers.push(c);
    }
    let covering_radius = nearest.iter().cloned().fold(0.0, f64::max);
    let min_separation = closest_pair(s, &centers).map_or(f64::INFINITY, |(_, _, d)| d);
    let radius = if k == 1 {
        0.25 * s.injectivity_radius()
    } else {
        0.25 * min_separation
    };
    Ok(DiskPacking {
        surface: s.clone(),
        radii: vec![radius; k],
        centers,
        min_separation,
        covering_radius,
        covering_tolerance: spacing,
        seed,
    })
}

fn closest_pair(s: &ModelSurface, pts: &[SurfacePoint]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = s.distance(&pts[i], &pts[j]);
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub packing: DiskPacking,
    pub alpha: f64,
    /// Hole radii, `k^-alpha` unless set explicitly.
    pub radii: Vec<f64>,
}

impl DomainSpec {
    pub fn surface(&self) -> &ModelSurface {
        &self.packing.surface
    }

    pub fn k(&self) -> usize {
        self.packing.k()
    }

    pub fn centers(&self) -> &[SurfacePoint] {
        &self.packing.centers
    }

    /// Domain with explicitly chosen holes, checked like [`make_domain_spec`].
    pub fn with_holes(surface: &ModelSurface, centers: Vec<SurfacePoint>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::Usage("one radius per center required".into()));
        }
        let centers: Vec<_> = centers.iter().map(|c| surface.normalize(c)).collect();
        let min_separation = closest_pair(surface, &centers).map_or(f64::INFINITY, |p| p.2);
        let packing = DiskPacking {
            surface: surface.clone(),
            radii: radii.clone(),
            centers,
            min_separation,
            covering_radius: f64::NAN,
            covering_tolerance: 0.0,
            seed: 0,
        };
        let spec = Self { packing, alpha: f64::NAN, radii };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let s = self.surface();
        for (j, &r) in self.radii.iter().enumerate() {
            if !(r > 0.0) || r >= s.injectivity_radius() {
                return Err(Error::Geometry(format!(
                    "hole {j} has radius {r}, which must lie in (0, {})",
                    s.injectivity_radius()
                )));
            }
        }
        let c = self.centers();
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = s.distance(&c[i], &c[j]);
                if d <= 2.0 * (self.radii[i] + self.radii[j]) {
                    return Err(Error::Geometry(format!(
                        "doubled disks {i} and {j} overlap: distance {d:.6} <= {:.6}",
                        2.0 * (self.radii[i] + self.radii[j])
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Holes of radius `k^-alpha` about the packing centers.
pub fn make_domain_spec(p: &DiskPacking, alpha: f64) -> Result<DomainSpec> {
    if !(alpha >= 1.0) {
        return Err(Error::Domain(format!("radius exponent must be at least 1, got {alpha}")));
    }
    let k = p.k();
    let r = (k as f64).powf(-alpha);
    let spec = DomainSpec { packing: p.clone(), alpha, radii: vec![r; k] };
    spec.check()?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoleSplit {
    /// Holes with `r_j >= sqrt(delta) k^{-1/4}`.
    pub large: Vec<usize>,
    pub small: Vec<usize>,
    /// `(4 / 3π) sqrt(k)`, the bound on `large.len()` when it applies.
    pub count_bound: f64,
    /// Whether `Σ r_j² <= (4 / 3π) δ`, the hypothesis of the count bound.
    pub bound_applies: bool,
}

pub fn split_large_holes(d: &DomainSpec, delta: f64) -> HoleSplit {
    let k = d.k() as f64;
    let threshold = delta.sqrt() * k.powf(-0.25);
    let (large, small): (Vec<usize>, Vec<usize>) = (0..d.k()).partition(|&j| d.radii[j] >= threshold);
    let c = 4.0 / (3.0 * PI);
    let sum_sq: f64 = d.radii.iter().map(|r| r * r).sum();
    HoleSplit { large, small, count_bound: c * k.sqrt(), bound_applies: sum_sq <= c * delta }
}

/// On-disk form of a domain specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingFile {
    pub surface: SurfaceDescriptor,
    pub seed: u64,
    pub k: usize,
    pub alpha: f64,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub min_separation: f64,
    pub covering_radius: f64,
}

impl PackingFile {
    pub fn from_spec(d: &DomainSpec) -> Self {
        let torus = d.surface().kind() == SurfaceKind::FlatTorus;
        Self {
            surface: d.surface().descriptor().clone(),
            seed: d.packing.seed,
            k: d.k(),
            alpha: d.alpha,
            centers: d
                .centers()
                .iter()
                .map(|c| if torus { c[..2].to_vec() } else { c.to_vec() })
                .collect(),
            radii: d.radii.clone(),
            min_separation: d.packing.min_separation,
            covering_radius: d.packing.covering_radius,
        }
    }

    pub fn to_spec(&self) -> Result<DomainSpec> {
        let s = ModelSurface::from_descriptor(&self.surface)?;
        if self.centers.len() != self.k || self.radii.len() != self.k {
            return Err(Error::Parse(format!(
                "packing lists {} centers and {} radii for k = {}",
                self.centers.len(),
                self.radii.len(),
                self.k
            )));
        }
        let mut centers = Vec::with_capacity(self.k);
        for c in &self.centers {
            let p = match c.as_slice() {
                [u, v] => [*u, *v, 0.0],
                [x, y, z] => [*x, *y, *z],
                _ => return Err(Error::Parse(format!("center with {} coordinates", c.len()))),
            };
            centers.push(s.normalize(&p));
        }
        let mut spec = DomainSpec::with_holes(&s, centers, self.radii.clone())?;
        spec.alpha = self.alpha;
        spec.packing.seed = self.seed;
        spec.packing.covering_radius = self.covering_radius;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}
