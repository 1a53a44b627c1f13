//! Numerical toolkit for the first Steklov eigenvalue of domains obtained by
//! removing many small geodesic disks from a closed surface of constant
//! curvature.
//!
//! The pipeline runs separated-point selection ([`packing`]), punctured and
//! closed triangulations ([`mesh`]), P1 finite elements ([`fem`]), spectral
//! post-processing ([`spectra`]), measure-level stability checks
//! ([`stability`]) and parameter sweeps ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod fem;
pub mod mesh;
pub mod packing;
pub mod spectra;
pub mod stability;
pub mod surface;

pub use error::{Error, Result};

/// Run every dense and sparse kernel single-threaded so repeated runs produce
/// bit-identical results. Parallelism lives at the sweep level instead.
pub fn init_numerics() {
    faer::set_global_parallelism(faer::Par::Seq);
}
