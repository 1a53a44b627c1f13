use serde::Serialize;

use super::{assemble_stiffness_subset, solve_refined};
use crate::fem::poisson::SOLVE_TOL;
use crate::mesh::FilledMesh;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Extension {
    /// Values on every vertex of the filled mesh.
    pub values: Vec<f64>,
    /// Dirichlet energy of the extension inside the holes.
    pub energy_inside: f64,
    /// Dirichlet energy of the given function on the domain.
    pub energy_domain: f64,
}

impl Extension {
    pub fn energy_ratio(&self) -> f64 {
        self.energy_inside / self.energy_domain
    }
}

/// Extend nodal values on the domain into the holes of `filled`, minimizing
/// the Dirichlet energy inside each hole.
pub fn harmonic_extension(filled: &FilledMesh, domain_values: &[f64]) -> Result<Extension> {
    let nd = filled.n_domain_vertices;
    if domain_values.len() != nd {
        return Err(Error::Usage(format!(
            "expected {nd} domain values, got {}",
            domain_values.len()
        )));
    }
    let m = &filled.mesh;
    let n = m.n_vertices();
    let k_in = assemble_stiffness_subset(m, filled.n_domain_triangles..m.n_triangles())?;
    let k_out = assemble_stiffness_subset(m, 0..filled.n_domain_triangles)?;
    let mut values = domain_values.to_vec();
    values.resize(n, 0.0);
    let inner: Vec<usize> = (nd..n).collect();
    if !inner.is_empty() {
        let coupling = k_in.matvec(&values);
        let rhs: Vec<f64> = inner.iter().map(|&v| -coupling[v]).collect();
        let khh = k_in.principal(&inner);
        let factor = khh.factor()?;
        let (x, _) = solve_refined(&khh, &factor, &rhs, SOLVE_TOL)?;
        for (&v, x) in inner.iter().zip(x) {
            values[v] = x;
        }
    }
    let energy_inside = k_in.quad(&values);
    let energy_domain = k_out.quad(&values);
    Ok(Extension { values, energy_inside, energy_domain })
}
