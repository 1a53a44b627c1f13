use serde::Serialize;

use super::{assemble_stiffness, norm, solve_refined, NodalMeasure, SparseSym, Support};
use crate::mesh::TriMesh;
use crate::{Error, Result};

/// Relative residual required of every linear solve.
pub(crate) const SOLVE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct PoissonSolution {
    /// Nodal values, exactly zero on the boundary and nonpositive inside.
    pub psi: Vec<f64>,
    /// Normal flux as a boundary measure.
    pub beta: NodalMeasure,
    /// Relative residual of the interior system.
    pub residual_norm: f64,
    /// Total mass of the source measure.
    pub source_mass: f64,
}

impl PoissonSolution {
    /// `|Σβ - ∫f| / ∫f`.
    pub fn divergence_defect(&self) -> f64 {
        if self.source_mass == 0.0 {
            return self.beta.mass().abs();
        }
        (self.beta.mass() - self.source_mass).abs() / self.source_mass
    }
}

/// Solve `Δψ = -f` with `ψ = 0` on the boundary, where the positive
/// Laplacian convention makes `ψ <= 0`. The source is the lumped measure
/// `f dv`. The flux `β` is the weak boundary residual `Kψ + F`, so
/// `Σβ = ∫f` holds up to the solver residual.
pub fn solve_poisson_dirichlet(m: &TriMesh, source: &NodalMeasure) -> Result<PoissonSolution> {
    let k = assemble_stiffness(m)?;
    solve_poisson_with(&k, &m.boundary_mask(), source)
}

pub fn solve_poisson_with(k: &SparseSym, boundary: &[bool], source: &NodalMeasure) -> Result<PoissonSolution> {
    let n = k.dim();
    if source.len() != n || boundary.len() != n {
        return Err(Error::Usage("source measure and boundary mask must match the mesh".into()));
    }
    if source.support != Support::Area {
        return Err(Error::Usage("Poisson source must be an area measure".into()));
    }
    if !boundary.iter().any(|&b| b) {
        return Err(Error::Usage("Dirichlet problem needs at least one boundary vertex".into()));
    }
    if let Some(v) = source.weights.iter().position(|&w| !(w >= 0.0)) {
        return Err(Error::Domain(format!("source weight at vertex {v} is negative")));
    }
    let interior: Vec<usize> = (0..n).filter(|&v| !boundary[v]).collect();
    let f = &source.weights;
    let rhs: Vec<f64> = interior.iter().map(|&v| -f[v]).collect();
    let mut psi = vec![0.0; n];
    let mut residual_norm = 0.0;
    if !interior.is_empty() && norm(&rhs) > 0.0 {
        let kii = k.principal(&interior);
        let factor = kii.factor()?;
        let (x, res) = solve_refined(&kii, &factor, &rhs, SOLVE_TOL)?;
        residual_norm = res;
        for (&v, x) in interior.iter().zip(x) {
            psi[v] = x;
        }
    }
    let kpsi = k.matvec(&psi);
    let beta = (0..n).map(|v| if boundary[v] { kpsi[v] + f[v] } else { 0.0 }).collect();
    Ok(PoissonSolution {
        psi,
        beta: NodalMeasure::new(beta, Support::Boundary, "beta"),
        residual_norm,
        source_mass: source.mass(),
    })
}
