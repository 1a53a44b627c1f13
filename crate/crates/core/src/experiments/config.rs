use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mesh::MeshOptions;
use crate::surface::{ModelSurface, SurfaceDescriptor};
use crate::{Error, Result};

fn default_alpha() -> f64 {
    1.5
}
fn default_seed() -> u64 {
    1
}
fn default_h0() -> f64 {
    0.01
}
fn default_hole_fraction() -> f64 {
    0.25
}
fn default_sep_fraction() -> f64 {
    0.08
}
fn default_eigen_count() -> usize {
    10
}
fn default_eigen_tol() -> f64 {
    1e-9
}
fn default_window_c() -> f64 {
    4.0
}
fn default_max_vertices() -> usize {
    500_000
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// Parameters of a construction sweep, read from TOML.
///
/// ```toml
/// surface = "sphere"
/// ks = [6, 12, 24, 48, 96]
/// alpha = 1.5
/// seed = 1
///
/// [output]
/// csv = "sweep.csv"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `sphere`, `square-torus`, `equilateral-torus` or `torus`.
    pub surface: String,
    /// Basis of a general flat torus, `[[a1x, a1y], [a2x, a2y]]`.
    #[serde(default)]
    pub lattice: Option<[[f64; 2]; 2]>,
    pub ks: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Background edge length.
    #[serde(default = "default_h0")]
    pub h0: f64,
    /// Hole boundary edges are at most this fraction of the hole radius.
    #[serde(default = "default_hole_fraction")]
    pub hole_fraction: f64,
    /// The background edge is at most this fraction of the smallest
    /// distance between hole centers.
    #[serde(default = "default_sep_fraction")]
    pub sep_fraction: f64,
    #[serde(default = "default_eigen_count")]
    pub eigen_count: usize,
    #[serde(default = "default_eigen_tol")]
    pub eigen_tol: f64,
    /// Steklov window half-width is `window_c * log k / k`.
    #[serde(default = "default_window_c")]
    pub window_c: f64,
    #[serde(default = "default_max_vertices")]
    pub max_vertices: usize,
    #[serde(default)]
    pub output: OutputPaths,
}

impl SweepConfig {
    pub fn new(surface: &str, ks: Vec<usize>) -> Self {
        Self {
            surface: surface.to_string(),
            lattice: None,
            ks,
            alpha: default_alpha(),
            seed: default_seed(),
            h0: default_h0(),
            hole_fraction: default_hole_fraction(),
            sep_fraction: default_sep_fraction(),
            eigen_count: default_eigen_count(),
            eigen_tol: default_eigen_tol(),
            window_c: default_window_c(),
            max_vertices: default_max_vertices(),
            output: OutputPaths::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }

    pub fn descriptor(&self) -> Result<SurfaceDescriptor> {
        match (&self.lattice, self.surface.as_str()) {
            (Some([a, b]), "torus") => Ok(SurfaceDescriptor::Torus { basis: [*a, *b] }),
            (Some(_), other) => Err(Error::Usage(format!("a lattice only applies to surface = \"torus\", not {other:?}"))),
            (None, name) => SurfaceDescriptor::from_name(name),
        }
    }

    pub fn surface(&self) -> Result<ModelSurface> {
        ModelSurface::from_descriptor(&self.descriptor()?)
    }

    /// Mesh options for a packing whose closest centers are `separation` apart.
    pub fn mesh_options(&self, separation: f64) -> MeshOptions {
        MeshOptions {
            target_h: self.h0.min(self.sep_fraction * separation),
            hole_fraction: self.hole_fraction,
            max_vertices: self.max_vertices,
            ..MeshOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::Usage("sweep needs at least one k".into()));
        }
        if self.ks.windows(2).any(|w| w[0] >= w[1]) || self.ks[0] == 0 {
            return Err(Error::Usage(format!("k list must be positive and strictly increasing, got {:?}", self.ks)));
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::Domain(format!("alpha must be at least 1, got {}", self.alpha)));
        }
        let s = self.surface()?;
        if !(self.h0 > 0.0 && self.h0 < s.injectivity_radius()) {
            return Err(Error::Domain(format!("h0 = {} is not a usable edge length", self.h0)));
        }
        if !(self.hole_fraction > 0.0 && self.hole_fraction <= 1.0) {
            return Err(Error::Domain(format!("hole_fraction = {} must lie in (0, 1]", self.hole_fraction)));
        }
        if !(self.sep_fraction > 0.0 && self.sep_fraction <= 1.0) {
            return Err(Error::Domain(format!("sep_fraction = {} must lie in (0, 1]", self.sep_fraction)));
        }
        if self.eigen_count < 4 {
            return Err(Error::Usage("eigen_count must be at least 4".into()));
        }
        if !(self.eigen_tol > 0.0 && self.window_c >= 0.0) {
            return Err(Error::Usage("eigen_tol must be positive and window_c nonnegative".into()));
        }
        Ok(())
    }
}
