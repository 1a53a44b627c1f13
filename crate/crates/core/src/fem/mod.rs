//! P1 finite elements on triangle meshes: stiffness and lumped mass
//! assembly, the Dirichlet Poisson problem with conservative flux recovery,
//! harmonic extension into holes and a generalized symmetric eigensolver.

mod assemble;
mod eigen;
mod harmonic;
mod poisson;
mod sparse;

pub use assemble::{
    assemble_area_mass, assemble_area_mass_values, assemble_boundary_mass, assemble_boundary_mass_values,
    assemble_stiffness, assemble_stiffness_subset, NodalMeasure, Support,
};
pub use eigen::{generalized_eigs, generalized_eigs_with, EigenOptions};
pub use harmonic::{harmonic_extension, Extension};
pub use poisson::{solve_poisson_dirichlet, solve_poisson_with, PoissonSolution};
pub use sparse::{Factor, SparseSym};

pub(crate) use sparse::{norm, solve_refined};
