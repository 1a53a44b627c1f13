use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use steklab::experiments::{self, emit_results, fit_rate, load_results, run_sweep, Format, SweepConfig};
use steklab::fem::{assemble_area_mass, assemble_stiffness, generalized_eigs, solve_poisson_dirichlet, NodalMeasure};
use steklab::mesh::{fill_holes, mesh_domain, mesh_quality, read_mesh, write_mesh, MeshOptions, Region, TriMesh};
use steklab::packing::{make_domain_spec, select_separated_points, PackingFile};
use steklab::stability::{certify_sphere, CertificateOptions, DualNormSolver, MeasureDiff};
use steklab::surface::{ModelSurface, SurfaceDescriptor};

#[derive(Parser)]
#[command(name = "steklab", version, about = "Steklov eigenvalues of many-holed domains on model surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose k separated centers and write the packing as JSON.
    Pack {
        #[arg(long, default_value = "sphere")]
        surface: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Triangulate the surface minus the holes of a packing.
    Mesh {
        #[arg(long)]
        packing: PathBuf,
        /// Overrides the hole exponent stored in the packing.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        /// Background edges are also capped at this fraction of the smallest
        /// center separation.
        #[arg(long, default_value_t = 0.08)]
        sep_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Laplace spectrum of a closed mesh, or the Steklov spectrum of a domain
    /// mesh with the flux density of the Poisson problem.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum, default_value_t = Density::Poisson)]
        density: Density,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a construction sweep described by a TOML config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit decay laws to the gaps of a sweep (CSV or JSON).
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual Sobolev distances between the flux measure of a domain mesh and
    /// the area measure of the filled surface.
    Dualnorm {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Centered gap certificate for a domain mesh on the sphere.
    Certify {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Density {
    /// Flux of the Poisson problem with unit source.
    Poisson,
    /// Unit density along the boundary.
    Uniform,
}

#[derive(Serialize)]
struct SpectrumJson {
    kind: steklab::spectra::SpectrumKind,
    eigenvalues: Vec<f64>,
    mass: f64,
    normalized: Vec<f64>,
    residuals: Vec<f64>,
    mesh_hash: String,
}

#[derive(Serialize)]
struct DualNormJson {
    dot_probability: f64,
    full_probability: f64,
    beta_mass: f64,
    area_mass: f64,
    mesh_hash: String,
}

fn main() -> ExitCode {
    steklab::init_numerics();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_mesh(path: &Path) -> Result<(TriMesh, String)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    Ok((read_mesh(path)?, hash))
}

fn poisson_flux(m: &TriMesh) -> Result<NodalMeasure> {
    let area = assemble_area_mass(m, |_| 1.0)?;
    Ok(solve_poisson_dirichlet(m, &area)?.beta)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Pack { surface, k, alpha, seed, out } => {
            let s = ModelSurface::from_descriptor(&SurfaceDescriptor::from_name(&surface)?)?;
            let p = select_separated_points(&s, k, seed)?;
            let spec = make_domain_spec(&p, alpha)?;
            PackingFile::from_spec(&spec).save(&out)?;
            eprintln!("k = {k}, min separation {:.6}, covering radius {:.6}", p.min_separation, p.covering_radius);
        }
        Command::Mesh { packing, alpha, h, sep_fraction, out } => {
            let file = PackingFile::load(&packing)?;
            let mut spec = file.to_spec()?;
            if let Some(a) = alpha {
                spec = make_domain_spec(&spec.packing, a)?;
            }
            let s = spec.surface().clone();
            let h = h.min(sep_fraction * spec.packing.min_separation);
            let m = mesh_domain(&s, &spec, &MeshOptions::with_h(h))?;
            write_mesh(&m, &out)?;
            let q = mesh_quality(&m);
            eprintln!(
                "{} vertices, {} triangles, angles [{:.1}, {:.1}] deg, h_max {:.5}",
                q.n_vertices, q.n_triangles, q.min_angle_deg, q.max_angle_deg, q.h_max
            );
        }
        Command::Solve { mesh, density, count, out } => {
            let (m, mesh_hash) = load_mesh(&mesh)?;
            let k = assemble_stiffness(&m)?;
            let measure = match (m.region, density) {
                (Region::Closed, _) => assemble_area_mass(&m, |_| 1.0)?,
                (Region::Domain, Density::Poisson) => poisson_flux(&m)?,
                (Region::Domain, Density::Uniform) => steklab::fem::assemble_boundary_mass(&m, |_| 1.0)?,
            };
            let r = generalized_eigs(&k, &measure, count)?;
            emit(
                &SpectrumJson {
                    kind: r.kind,
                    eigenvalues: r.eigenvalues,
                    mass: r.measure_mass,
                    normalized: r.normalized,
                    residuals: r.residuals,
                    mesh_hash,
                },
                out.as_deref(),
            )?;
        }
        Command::Sweep { config, csv, json } => {
            let cfg = SweepConfig::load(&config)?;
            let records = run_sweep(&cfg)?;
            let fit = fit_rate(&records).ok();
            let csv = csv.or_else(|| cfg.output.csv.clone());
            let json = json.or_else(|| cfg.output.json.clone());
            if let Some(p) = &csv {
                emit_results(&records, fit.as_ref(), Format::Csv, p)?;
            }
            if let Some(p) = &json {
                let results = experiments::SweepResults { config: Some(cfg.clone()), records: records.clone(), fit };
                std::fs::write(p, experiments::to_json(&results)).with_context(|| format!("writing {}", p.display()))?;
            }
            if csv.is_none() && json.is_none() {
                print!("{}", experiments::to_csv(&records)?);
            }
            let failed: Vec<usize> = records.iter().filter(|r| !r.ok()).map(|r| r.k).collect();
            if !failed.is_empty() {
                eprintln!("failed k: {failed:?}");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Fit { input, out } => {
            let results = load_results(&input)?;
            let fit = fit_rate(&results.records)?;
            emit(&fit, out.as_deref())?;
        }
        Command::Dualnorm { mesh, out } => {
            let (m, mesh_hash) = load_mesh(&mesh)?;
            if m.region != Region::Domain || m.boundary_loops.is_empty() {
                bail!("dualnorm needs a domain mesh with holes");
            }
            let beta = poisson_flux(&m)?;
            let filled = fill_holes(&m)?;
            let k = assemble_stiffness(&filled.mesh)?;
            let area = assemble_area_mass(&filled.mesh, |_| 1.0)?;
            let beta = beta.padded(filled.mesh.n_vertices());
            let solver = DualNormSolver::new(&k, Some(&area))?;
            let d = MeasureDiff::probability(&beta, &area)?;
            emit(
                &DualNormJson {
                    dot_probability: solver.dot(&d)?,
                    full_probability: solver.full(&d)?,
                    beta_mass: beta.mass(),
                    area_mass: area.mass(),
                    mesh_hash,
                },
                out.as_deref(),
            )?;
        }
        Command::Certify { mesh, out } => {
            let (m, _) = load_mesh(&mesh)?;
            let beta = poisson_flux(&m)?;
            let cert = certify_sphere(&m, &beta, &CertificateOptions::default())?;
            emit(&cert, out.as_deref())?;
            if !cert.holds {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
