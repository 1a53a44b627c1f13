use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SweepConfig;
use crate::fem::{assemble_area_mass, assemble_stiffness, generalized_eigs_with, solve_poisson_with, EigenOptions};
use crate::mesh::{fill_holes, mesh_domain, mesh_quality};
use crate::packing::{make_domain_spec, select_separated_points};
use crate::spectra::{laplace_on_mesh, quasimode_residual, window_count};
use crate::stability::{certify_sphere, CertificateOptions, DualNormSolver, GapCertificate, MeasureDiff};
use crate::surface::{ModelSurface, SurfaceKind};
use crate::Result;

/// Outcome of the construction for one hole count. Numeric fields are
/// `None` when the run failed; `status` then carries the error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub h_max: Option<f64>,
    pub n_vertices: Option<usize>,
    pub sigma1_bar: Option<f64>,
    /// `Λ₁ - σ̄₁` against the analytic `Λ₁` of the surface.
    pub gap: Option<f64>,
    pub beta_total: Option<f64>,
    pub psi_l2: Option<f64>,
    pub psi_linf: Option<f64>,
    pub quasimode_res: Option<f64>,
    pub window_count: Option<usize>,
    /// `|σ₁β - λ₁ dv|` in the dual of `W^{1,2}` on the filled surface.
    pub dual_dist: Option<f64>,
    pub wall_ms: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<RecordDetails>,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(k: usize, wall_ms: u64, status: String) -> Self {
        Self {
            k,
            h_max: None,
            n_vertices: None,
            sigma1_bar: None,
            gap: None,
            beta_total: None,
            psi_l2: None,
            psi_linf: None,
            quasimode_res: None,
            window_count: None,
            dual_dist: None,
            wall_ms,
            status,
            details: None,
        }
    }
}

/// Diagnostics kept in the JSON output only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordDetails {
    /// `λ̄₁` of the filled closed mesh, the FEM error bar on `Λ₁`.
    pub lambda1_mesh: f64,
    pub lambda1_multiplicity: usize,
    /// `|Σβ - Area(Ω)| / Area(Ω)`.
    pub divergence_defect: f64,
    pub steklov_normalized: Vec<f64>,
    /// Homogeneous dual distance between the normalized `β` and `dv`.
    pub dual_dist_probability: f64,
    pub window_eta: f64,
    pub min_angle_deg: f64,
    pub min_hole_segments: usize,
    pub domain_triangles: usize,
    pub filled_vertices: usize,
    pub certificate: Option<GapCertificate>,
}

/// Run the construction for every `k` of the config. Failures are recorded
/// per `k` and never abort the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let s = cfg.surface()?;
    let mut records: Vec<SweepRecord> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let start = Instant::now();
            let out = run_one(cfg, &s, k);
            let wall_ms = start.elapsed().as_millis() as u64;
            match out {
                Ok(mut r) => {
                    r.wall_ms = wall_ms;
                    r
                }
                Err(e) => SweepRecord::failed(k, wall_ms, e.to_string()),
            }
        })
        .collect();
    records.sort_by_key(|r| r.k);
    Ok(records)
}

/// The construction for a single `k`.
pub fn run_one(cfg: &SweepConfig, s: &ModelSurface, k: usize) -> Result<SweepRecord> {
    let packing = select_separated_points(s, k, cfg.seed)?;
    let spec = make_domain_spec(&packing, cfg.alpha)?;
    let domain = mesh_domain(s, &spec, &cfg.mesh_options(packing.min_separation))?;
    let quality = mesh_quality(&domain);

    let k_dom = assemble_stiffness(&domain)?;
    let area = assemble_area_mass(&domain, |_| 1.0)?;
    let poisson = solve_poisson_with(&k_dom, &domain.boundary_mask(), &area)?;
    let beta = &poisson.beta;
    let psi_l2 = area.integrate(&poisson.psi.iter().map(|p| p * p).collect::<Vec<_>>()).sqrt();
    let psi_linf = poisson.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));

    let (lambda1, _) = s.lambda1();
    let kf = k.max(2) as f64;
    let eta = cfg.window_c * kf.ln() / kf;
    let eig = EigenOptions { tol: cfg.eigen_tol, seed: cfg.seed, ..EigenOptions::default() };
    // Extend the spectrum until it covers the whole window.
    let mut count = cfg.eigen_count;
    let mut steklov = generalized_eigs_with(&k_dom, beta, count, &eig)?;
    for _ in 0..4 {
        if *steklov.normalized.last().unwrap() > lambda1 + eta {
            break;
        }
        count *= 2;
        steklov = generalized_eigs_with(&k_dom, beta, count, &eig)?;
    }
    let sigma1 = steklov.eigenvalues[1];
    let sigma1_bar = steklov.normalized[1];
    let gap = lambda1 - sigma1_bar;

    let filled = fill_holes(&domain)?;
    let (laplace, v) = laplace_on_mesh(&filled.mesh, |_| 1.0, cfg.eigen_count)?;
    let mut chis: Vec<Vec<f64>> = steklov.eigenvectors[1..].to_vec();
    chis.extend(v.vectors.iter().map(|p| p[..domain.n_vertices()].to_vec()));
    let qm = quasimode_residual(&k_dom, beta, &v, &chis, k)?;

    let window = window_count(&steklov, lambda1, eta)?;

    let k_fill = assemble_stiffness(&filled.mesh)?;
    let area_fill = assemble_area_mass(&filled.mesh, |_| 1.0)?;
    let n_fill = filled.mesh.n_vertices();
    let beta_fill = beta.padded(n_fill);
    let dual = DualNormSolver::new(&k_fill, Some(&area_fill))?;
    let diff = MeasureDiff::new(&beta_fill.scaled(sigma1), &area_fill.scaled(v.lambda1))?;
    let dual_dist = dual.full(&diff)?;
    let dual_dist_probability = dual.dot(&MeasureDiff::probability(&beta_fill, &area_fill)?)?;

    let certificate = match s.kind() {
        SurfaceKind::Sphere => Some(certify_sphere(
            &domain,
            beta,
            &CertificateOptions { sigma1: Some(sigma1), ..CertificateOptions::default() },
        )?),
        SurfaceKind::FlatTorus => None,
    };

    let details = RecordDetails {
        lambda1_mesh: laplace.normalized[1],
        lambda1_multiplicity: v.dim(),
        divergence_defect: poisson.divergence_defect(),
        steklov_normalized: steklov.normalized.clone(),
        dual_dist_probability,
        window_eta: eta,
        min_angle_deg: quality.min_angle_deg,
        min_hole_segments: quality.holes.iter().map(|h| h.segments).min().unwrap_or(0),
        domain_triangles: domain.n_triangles(),
        filled_vertices: n_fill,
        certificate,
    };
    Ok(SweepRecord {
        k,
        h_max: Some(domain.h_max),
        n_vertices: Some(domain.n_vertices()),
        sigma1_bar: Some(sigma1_bar),
        gap: Some(gap),
        beta_total: Some(beta.mass()),
        psi_l2: Some(psi_l2),
        psi_linf: Some(psi_linf),
        quasimode_res: Some(qm.max_residual),
        window_count: Some(window),
        dual_dist: Some(dual_dist),
        wall_ms: 0,
        status: "ok".into(),
        details: Some(details),
    })
}
