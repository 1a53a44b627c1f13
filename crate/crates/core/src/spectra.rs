//! Normalized Laplace and Steklov spectra, the first Laplace eigenspace, and
//! quasimode diagnostics for Steklov problems on punctured domains.

use serde::{Deserialize, Serialize};

use crate::fem::{assemble_area_mass, assemble_stiffness, generalized_eigs, NodalMeasure, SparseSym, Support};
use crate::mesh::{mesh_closed_surface, TriMesh};
use crate::surface::{ModelSurface, SurfacePoint};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Laplace,
    Steklov,
}

/// Eigenpairs of a pencil `K u = λ B u`. Entry 0 is the constant mode with
/// eigenvalue exactly 0; eigenvectors are `B`-orthonormal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub kind: SpectrumKind,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub measure_mass: f64,
    /// `λ_i` times the measure mass.
    pub normalized: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Whether entry 0 is the deflated constant mode.
    pub zero_mode: bool,
    pub iterations: usize,
}

impl SpectralResult {
    pub(crate) fn new(
        kind: SpectrumKind,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
        measure_mass: f64,
        residuals: Vec<f64>,
        iterations: usize,
    ) -> Self {
        let normalized = eigenvalues.iter().map(|l| l * measure_mass).collect();
        Self { kind, eigenvalues, eigenvectors, measure_mass, normalized, residuals, zero_mode: true, iterations }
    }

    /// First nonzero normalized eigenvalue.
    pub fn first_normalized(&self) -> f64 {
        self.normalized[1]
    }

    /// Sizes of the clusters of nonzero normalized eigenvalues whose relative
    /// spread is within `tol` of each other.
    pub fn multiplicities(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut anchor = f64::NAN;
        for &l in &self.normalized[1..] {
            if !out.is_empty() && (l - anchor).abs() <= tol * anchor.abs() {
                out.last_mut().unwrap().1 += 1;
            } else {
                out.push((l, 1));
                anchor = l;
            }
        }
        out
    }
}

/// Relative tolerance under which eigenvalues count as one multiplet.
pub fn degeneracy_tolerance(h: f64) -> f64 {
    (10.0 * h * h).max(1e-6)
}

/// Basis of the first nonzero eigenspace of a Laplace problem.
#[derive(Clone, Debug)]
pub struct EigenBasisV {
    /// Unnormalized eigenvalue of the multiplet (mean of its members).
    pub lambda1: f64,
    /// `lambda1` times the area mass.
    pub lambda1_normalized: f64,
    /// Members of the multiplet, orthonormal in the area measure.
    pub vectors: Vec<Vec<f64>>,
    /// Eigenvalues of the individual members.
    pub members: Vec<f64>,
}

impl EigenBasisV {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn from_result(r: &SpectralResult, tol: f64) -> Result<Self> {
        if r.kind != SpectrumKind::Laplace || r.eigenvalues.len() < 2 {
            return Err(Error::Usage("need a Laplace spectrum with a nonzero eigenvalue".into()));
        }
        let l1 = r.eigenvalues[1];
        let mut idx = vec![1];
        while let Some(&l) = r.eigenvalues.get(idx.len() + 1) {
            if (l - l1).abs() > tol * l1 {
                break;
            }
            idx.push(idx.len() + 1);
        }
        if idx.len() + 1 == r.eigenvalues.len() {
            return Err(Error::Capacity(
                "first eigenspace may extend past the computed spectrum; request more eigenvalues".into(),
            ));
        }
        let members: Vec<f64> = idx.iter().map(|&i| r.eigenvalues[i]).collect();
        let lambda1 = members.iter().sum::<f64>() / members.len() as f64;
        Ok(Self {
            lambda1,
            lambda1_normalized: lambda1 * r.measure_mass,
            vectors: idx.iter().map(|&i| r.eigenvectors[i].clone()).collect(),
            members,
        })
    }
}

/// Laplace spectrum of the closed surface with the measure `f dv`, on a
/// quasi-uniform mesh of size `h`.
pub fn laplace_normalized(
    s: &ModelSurface,
    f: impl Fn(&SurfacePoint) -> f64,
    h: f64,
    count: usize,
) -> Result<(SpectralResult, EigenBasisV, TriMesh)> {
    let mesh = mesh_closed_surface(s, h)?;
    let (r, v) = laplace_on_mesh(&mesh, f, count)?;
    Ok((r, v, mesh))
}

pub fn laplace_on_mesh(
    mesh: &TriMesh,
    f: impl Fn(&SurfacePoint) -> f64,
    count: usize,
) -> Result<(SpectralResult, EigenBasisV)> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_area_mass(mesh, f)?;
    let r = generalized_eigs(&k, &m, count)?;
    let v = EigenBasisV::from_result(&r, degeneracy_tolerance(mesh.h_max))?;
    Ok((r, v))
}

/// Steklov spectrum of a domain mesh with the boundary measure `mu`.
pub fn steklov_normalized(m: &TriMesh, mu: &NodalMeasure, count: usize) -> Result<SpectralResult> {
    if m.boundary_loops.is_empty() && m.boundary_edges().is_empty() {
        return Err(Error::Usage("Steklov problem needs a mesh with boundary".into()));
    }
    if mu.support != Support::Boundary {
        return Err(Error::Usage("Steklov problem needs a boundary measure".into()));
    }
    let k = assemble_stiffness(m)?;
    generalized_eigs(&k, mu, count)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasimodeReport {
    /// `residuals[a][b]` pairs the a-th basis function with the b-th test vector.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    /// Per basis function: `|dφ|²` on the closed surface.
    pub energy: Vec<f64>,
    /// Per basis function: `∫ β φ²`.
    pub boundary_l2: Vec<f64>,
    /// Per basis function: `(|dφ|² / ∫βφ² - Λ₁) / (log k / k)`.
    pub energy_excess: Vec<f64>,
}

/// Residuals `|∫_Ω <dφ, dχ> - Λ₁ ∫ β φ χ| / (|χ|_{L²(β)} + |dχ|_{L²(Ω)})` for
/// every `φ` in `v` and every `χ` in `chis`.
///
/// `k_domain` and `beta` live on the domain mesh; the basis vectors may be
/// given on a filled mesh whose leading vertices are the domain's.
pub fn quasimode_residual(
    k_domain: &SparseSym,
    beta: &NodalMeasure,
    v: &EigenBasisV,
    chis: &[Vec<f64>],
    k_holes: usize,
) -> Result<QuasimodeReport> {
    let n = k_domain.dim();
    if beta.len() != n || chis.iter().any(|c| c.len() != n) || v.vectors.iter().any(|p| p.len() < n) {
        return Err(Error::Usage("quasimode inputs have mismatched dimensions".into()));
    }
    let lam = v.lambda1;
    let mut residuals = Vec::with_capacity(v.dim());
    let kchi: Vec<Vec<f64>> = chis.iter().map(|c| k_domain.matvec(c)).collect();
    let norms: Vec<f64> = chis
        .iter()
        .zip(&kchi)
        .map(|(c, kc)| {
            let trace = beta.integrate(&c.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
            let energy = c.iter().zip(kc).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
            trace + energy
        })
        .collect();
    let mut energy = Vec::new();
    let mut boundary_l2 = Vec::new();
    let mut energy_excess = Vec::new();
    let kk = k_holes.max(2) as f64;
    let rate = kk.ln() / kk;
    for (phi, &member) in v.vectors.iter().zip(&v.members) {
        let phi = &phi[..n];
        let row = chis
            .iter()
            .zip(&kchi)
            .zip(&norms)
            .map(|((c, kc), nrm)| {
                let a: f64 = phi.iter().zip(kc).map(|(p, k)| p * k).sum();
                let b: f64 = (0..n).map(|i| beta.weights[i] * phi[i] * c[i]).sum();
                (a - lam * b).abs() / nrm
            })
            .collect();
        residuals.push(row);
        let bl2: f64 = (0..n).map(|i| beta.weights[i] * phi[i] * phi[i]).sum();
        energy.push(member);
        boundary_l2.push(bl2);
        energy_excess.push((member / bl2 - lam) / rate);
    }
    let max_residual = residuals.iter().flatten().cloned().fold(0.0, f64::max);
    Ok(QuasimodeReport { residuals, max_residual, energy, boundary_l2, energy_excess })
}

/// Number of normalized eigenvalues (the zero mode included) in
/// `[center - eta, center + eta]`.
pub fn window_count(r: &SpectralResult, center: f64, eta: f64) -> Result<usize> {
    if eta.is_infinite() {
        return Ok(r.normalized.len());
    }
    if !(eta >= 0.0) {
        return Err(Error::Domain(format!("window half-width must be nonnegative, got {eta}")));
    }
    let top = *r.normalized.last().unwrap();
    if center + eta > top {
        return Err(Error::Capacity(format!(
            "window reaches {} but the computed spectrum stops at {top}",
            center + eta
        )));
    }
    Ok(r.normalized.iter().filter(|&&l| (l - center).abs() <= eta).count())
}
