use std::f64::consts::PI;

use steklab::fem::{
    assemble_area_mass, assemble_boundary_mass, assemble_stiffness, generalized_eigs, solve_poisson_dirichlet,
};
use steklab::mesh::{fill_holes, mesh_domain, planar_disk, MeshOptions};
use steklab::packing::{make_domain_spec, select_separated_points};
use steklab::spectra::{
    degeneracy_tolerance, laplace_normalized, laplace_on_mesh, quasimode_residual, steklov_normalized, window_count,
    SpectrumKind,
};
use steklab::surface::ModelSurface;
use steklab::Error;

#[test]
fn closed_surface_first_eigenvalues() {
    let cases = [
        (ModelSurface::sphere(), 8.0 * PI, 3),
        (ModelSurface::square_torus(), 4.0 * PI * PI, 4),
        (ModelSurface::equilateral_torus(), 8.0 * PI * PI / 3f64.sqrt(), 6),
    ];
    for (s, exact, mult) in cases {
        for h in [0.02, 0.014] {
            let (r, v, mesh) = laplace_normalized(&s, |_| 1.0, h, 10).unwrap();
            assert_eq!(r.kind, SpectrumKind::Laplace);
            assert!((r.first_normalized() - exact).abs() < 0.005 * exact, "{} vs {exact}", r.first_normalized());
            assert_eq!(v.dim(), mult, "h = {h}");
            let groups = r.multiplicities(degeneracy_tolerance(mesh.h_max));
            assert_eq!(groups[0].1, mult);
            assert!((v.lambda1_normalized - exact).abs() < 0.005 * exact);
        }
    }
}

#[test]
fn density_changes_the_normalized_spectrum() {
    let s = ModelSurface::sphere();
    let (r, _, _) = laplace_normalized(&s, |p| 1.0 + 10.0 * p[2] * p[2], 0.03, 4).unwrap();
    // Round metrics maximize the first normalized eigenvalue.
    assert!(r.first_normalized() < 8.0 * PI);
}

#[test]
fn disk_steklov_normalized() {
    let m = planar_disk(1.0, 0.02).unwrap();
    let ds = assemble_boundary_mass(&m, |_| 1.0).unwrap();
    let r = steklov_normalized(&m, &ds, 4).unwrap();
    assert!((r.first_normalized() - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
    let scaled = steklov_normalized(&m, &ds.scaled(7.5), 4).unwrap();
    assert!((scaled.first_normalized() - r.first_normalized()).abs() <= 1e-10 * r.first_normalized());
    let area = assemble_area_mass(&m, |_| 1.0).unwrap();
    assert!(matches!(steklov_normalized(&m, &area, 4), Err(Error::Usage(_))));
}

#[test]
fn construction_domain_stays_below_the_closed_surface() {
    let s = ModelSurface::sphere();
    let p = select_separated_points(&s, 12, 1).unwrap();
    let d = make_domain_spec(&p, 1.5).unwrap();
    let m = mesh_domain(&s, &d, &MeshOptions::with_h(0.02)).unwrap();
    let area = assemble_area_mass(&m, |_| 1.0).unwrap();
    let beta = solve_poisson_dirichlet(&m, &area).unwrap().beta;
    let r = steklov_normalized(&m, &beta, 6).unwrap();
    assert_eq!(r.kind, SpectrumKind::Steklov);
    assert!(r.first_normalized() < 8.0 * PI);

    // Filling the holes only adds test functions for the same measure.
    let f = fill_holes(&m).unwrap();
    let kf = assemble_stiffness(&f.mesh).unwrap();
    let lf = generalized_eigs(&kf, &beta.padded(f.mesh.n_vertices()), 6).unwrap();
    for i in 1..=6 {
        assert!(r.normalized[i] <= lf.normalized[i] * (1.0 + 1e-9), "{i}");
    }
}

#[test]
fn window_counts() {
    let m = planar_disk(1.0, 0.05).unwrap();
    let ds = assemble_boundary_mass(&m, |_| 1.0).unwrap();
    let r = steklov_normalized(&m, &ds, 8).unwrap();
    assert_eq!(window_count(&r, 0.0, f64::INFINITY).unwrap(), r.normalized.len());
    // σ = 1, 1, 2, 2, ... so a window about 2π·1.5 of half-width 2π·0.6 holds four.
    let c = 2.0 * PI;
    assert_eq!(window_count(&r, 1.5 * c, 0.6 * c).unwrap(), 4);
    let simple = r.normalized[1];
    assert!(window_count(&r, simple, 0.0).unwrap() <= 1);
    assert!(window_count(&r, c, 0.0).unwrap() <= 1);
    assert!(matches!(window_count(&r, 100.0 * c, 1.0), Err(Error::Capacity(_))));
    assert!(matches!(window_count(&r, c, -1.0), Err(Error::Domain(_))));
}

#[test]
fn quasimode_residuals() {
    let s = ModelSurface::sphere();
    let k = 24;
    let p = select_separated_points(&s, k, 1).unwrap();
    let d = make_domain_spec(&p, 1.5).unwrap();
    let m = mesh_domain(&s, &d, &MeshOptions::with_h(0.015)).unwrap();
    let kd = assemble_stiffness(&m).unwrap();
    let area = assemble_area_mass(&m, |_| 1.0).unwrap();
    let beta = solve_poisson_dirichlet(&m, &area).unwrap().beta;
    let f = fill_holes(&m).unwrap();
    let (_, v) = laplace_on_mesh(&f.mesh, |_| 1.0, 8).unwrap();
    assert_eq!(v.dim(), 3);
    let n = m.n_vertices();
    let rate = (k as f64).ln() / k as f64;

    let constant = vec![1.0; n];
    let q = quasimode_residual(&kd, &beta, &v, &[constant], k).unwrap();
    // Only the trace term survives: Λ₁ |∫βφ| / |1|_{L²(β)}, up to the
    // round-off energy of the constant in the denominator.
    for (a, phi) in v.vectors.iter().enumerate() {
        let direct = v.lambda1 * beta.integrate(&phi[..n]).abs() / beta.mass().sqrt();
        assert!((q.residuals[a][0] - direct).abs() <= 1e-4 * direct);
    }
    assert!(q.max_residual < 5.0 * rate, "{}", q.max_residual);

    let st = steklov_normalized(&m, &beta, 4).unwrap();
    let chi = st.eigenvectors[1].clone();
    let q = quasimode_residual(&kd, &beta, &v, &[chi.clone()], k).unwrap();
    let chi_energy = kd.quad(&chi).sqrt();
    for (a, phi) in v.vectors.iter().enumerate() {
        let phi_energy = kd.quad(&phi[..n]).sqrt();
        assert!(q.residuals[a][0] < 0.5 * phi_energy * chi_energy);
    }
    assert!(q.energy_excess.iter().all(|x| x.is_finite()));
    assert!(matches!(quasimode_residual(&kd, &beta, &v, &[vec![0.0; 3]], k), Err(Error::Usage(_))));
}
