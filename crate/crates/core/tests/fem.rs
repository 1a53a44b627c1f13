mod common;

use std::f64::consts::PI;

use steklab::fem::{
    assemble_area_mass, assemble_boundary_mass, assemble_stiffness, generalized_eigs, generalized_eigs_with,
    harmonic_extension, solve_poisson_dirichlet, EigenOptions, NodalMeasure, SparseSym, Support,
};
use steklab::mesh::{
    icosphere, mesh_closed_surface, mesh_domain, planar_annulus, planar_disk, Geometry, MeshOptions, Region, TriMesh,
};
use steklab::packing::{make_domain_spec, select_separated_points, DomainSpec};
use steklab::surface::ModelSurface;
use steklab::Error;

use common::{jacobi_eigen, RadialOracle};

fn plane_mesh(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> TriMesh {
    TriMesh { vertices, triangles, boundary_loops: vec![], geometry: Geometry::Plane, region: Region::Domain, h_max: 1.0 }
}

fn cap_domain(radius: f64, h: f64) -> (ModelSurface, DomainSpec, TriMesh) {
    let s = ModelSurface::sphere();
    let d = DomainSpec::with_holes(&s, vec![[0.0, 0.0, 1.0]], vec![radius]).unwrap();
    let m = mesh_domain(&s, &d, &MeshOptions::with_h(h)).unwrap();
    (s, d, m)
}

#[test]
fn equilateral_element_matrix() {
    let m = plane_mesh(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.75f64.sqrt(), 0.0]], vec![[0, 1, 2]]);
    let k = assemble_stiffness(&m).unwrap();
    let w = 1.0 / (2.0 * 3f64.sqrt());
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 2.0 * w } else { -w };
            assert!((k.get(i, j) - expect).abs() < 1e-15);
        }
    }
    let degenerate = plane_mesh(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], vec![[0, 1, 2]]);
    assert!(matches!(assemble_stiffness(&degenerate), Err(Error::Assembly(_))));
}

#[test]
fn stiffness_kills_constants_and_is_scale_invariant() {
    let m = planar_disk(1.0, 0.1).unwrap();
    let k = assemble_stiffness(&m).unwrap();
    let ones = vec![1.0; m.n_vertices()];
    assert!(k.matvec(&ones).iter().all(|x| x.abs() < 1e-13));
    let mut big = m.clone();
    big.vertices.iter_mut().for_each(|p| p.iter_mut().for_each(|x| *x *= 3.0));
    let kb = assemble_stiffness(&big).unwrap();
    for i in 0..m.n_vertices() {
        for (j, v) in k.row(i) {
            assert!((kb.get(i, j) - v).abs() < 1e-12);
        }
    }
    let s = icosphere(6);
    let ks = assemble_stiffness(&s).unwrap();
    assert!(ks.matvec(&vec![1.0; s.n_vertices()]).iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn sparse_factor_solves_against_dense() {
    let m = planar_disk(1.0, 0.25).unwrap();
    let k = assemble_stiffness(&m).unwrap();
    let a = k.add_diagonal(&vec![0.5; k.dim()]);
    let b: Vec<f64> = (0..a.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let x = a.factor().unwrap().solve(&b);
    let dense = a.to_dense();
    for i in 0..a.dim() {
        let r: f64 = dense[i].iter().zip(&x).map(|(p, q)| p * q).sum();
        assert!((r - b[i]).abs() < 1e-12);
    }
    let same = SparseSym::from_parts(2, &[(0, 1, -1.0), (1, 0, -1.0)], &[2.0, 2.0]);
    assert_eq!(same.get(0, 1), -2.0);
}

#[test]
fn area_measures() {
    let s = ModelSurface::sphere();
    let closed = mesh_closed_surface(&s, 0.05).unwrap();
    let one = assemble_area_mass(&closed, |_| 1.0).unwrap();
    assert!((one.mass() - 1.0).abs() < 1e-12);
    assert_eq!(one.support, Support::Area);
    assert_eq!(assemble_area_mass(&closed, |_| 0.0).unwrap().mass(), 0.0);
    assert!(matches!(assemble_area_mass(&closed, |p| p[2]), Err(Error::Domain(_))));

    let p = select_separated_points(&s, 12, 1).unwrap();
    let d = make_domain_spec(&p, 1.5).unwrap();
    let m = mesh_domain(&s, &d, &MeshOptions::with_h(0.02)).unwrap();
    let area = assemble_area_mass(&m, |_| 1.0).unwrap().mass();
    let exact = 1.0 - 12.0 * s.disk_area(12f64.powf(-1.5)).unwrap();
    // Holes are polygons with at least 16 sides, which miss (2π/16)²/6 of
    // each disk's area.
    let holes = 1.0 - exact;
    assert!((area - exact).abs() <= (2.0 * PI / 16.0).powi(2) / 6.0 * holes, "{area} vs {exact}");
}

#[test]
fn boundary_measures() {
    let (s, _, m) = cap_domain(0.3, 0.02);
    let len = assemble_boundary_mass(&m, |_| 1.0).unwrap();
    let exact = s.disk_boundary_length(0.3).unwrap();
    assert!((len.mass() - exact).abs() <= 0.01 * exact);
    assert_eq!(len.support, Support::Boundary);
    assert_eq!(assemble_boundary_mass(&m, |_| 0.0).unwrap().mass(), 0.0);
    let closed = icosphere(4);
    assert!(matches!(assemble_boundary_mass(&closed, |_| 1.0), Err(Error::Usage(_))));
}

#[test]
fn poisson_on_the_sphere_minus_a_cap_matches_the_radial_oracle() {
    let a = 0.3;
    let (s, d, m) = cap_domain(a, 0.01);
    let area = assemble_area_mass(&m, |_| 1.0).unwrap();
    let sol = solve_poisson_dirichlet(&m, &area).unwrap();
    let oracle = RadialOracle::new(a);

    // The oracle agrees with the closed form of the radial profile.
    let r = PI.sqrt();
    for t in [0.31, 0.4, 0.6, 0.8] {
        let closed = -((r * t).sin() / (r * a).sin()).ln() / (2.0 * PI);
        assert!((oracle.psi(t) - closed).abs() < 1e-8, "t = {t}");
    }
    assert!((oracle.flux - (1.0 - s.disk_area(a).unwrap())).abs() < 1e-10);

    let c = d.centers()[0];
    let (mut err, mut norm) = (0.0, 0.0);
    for (v, p) in m.vertices.iter().enumerate() {
        let exact = oracle.psi(s.distance(&c, p));
        err += area.weights[v] * (sol.psi[v] - exact).powi(2);
        norm += area.weights[v] * exact * exact;
    }
    let rel = (err / norm).sqrt();
    assert!(rel < 0.01, "relative L2 error {rel}");
    assert!((sol.beta.mass() - oracle.flux).abs() < 1e-3 * oracle.flux);
    assert!(sol.divergence_defect() < 1e-10);
    assert!(sol.psi.iter().all(|&x| x <= 1e-10));
    assert_eq!(sol.beta.support, Support::Boundary);
}

#[test]
fn poisson_edge_cases() {
    let (_, _, m) = cap_domain(0.3, 0.05);
    let zero = assemble_area_mass(&m, |_| 0.0).unwrap();
    let sol = solve_poisson_dirichlet(&m, &zero).unwrap();
    assert!(sol.psi.iter().all(|&x| x == 0.0));
    assert!(sol.beta.weights.iter().all(|&x| x == 0.0));
    let closed = icosphere(4);
    let area = assemble_area_mass(&closed, |_| 1.0).unwrap();
    assert!(matches!(solve_poisson_dirichlet(&closed, &area), Err(Error::Usage(_))));
}

#[test]
fn divergence_identity_on_construction_domains() {
    let s = ModelSurface::sphere();
    for k in [6, 24] {
        let p = select_separated_points(&s, k, 2).unwrap();
        let d = make_domain_spec(&p, 1.5).unwrap();
        let m = mesh_domain(&s, &d, &MeshOptions::with_h(0.015)).unwrap();
        let f = assemble_area_mass(&m, |x| 1.0 + x[2].abs()).unwrap();
        let sol = solve_poisson_dirichlet(&m, &f).unwrap();
        assert!(sol.divergence_defect() < 1e-10);
        assert!(sol.psi.iter().all(|&x| x <= 1e-10));
        assert!(sol.beta.weights.iter().all(|&b| b >= -1e-12));
    }
}

#[test]
fn harmonic_extension_of_the_annulus_trace() {
    let f = planar_annulus(0.02).unwrap();
    let nd = f.n_domain_vertices;
    let trace: Vec<f64> = f.mesh.vertices[..nd]
        .iter()
        .map(|p| {
            let r = p[0].hypot(p[1]);
            (r / 5.0 + 4.0 / (5.0 * r)) * (p[0] / r)
        })
        .collect();
    let ext = harmonic_extension(&f, &trace).unwrap();
    let ratio = ext.energy_ratio();
    assert!((ratio - 5.0 / 3.0).abs() < 0.02 * 5.0 / 3.0, "ratio {ratio}");
    for (v, p) in f.mesh.vertices.iter().enumerate().skip(nd) {
        assert!((ext.values[v] - p[0]).abs() < 1e-3);
    }

    let constant = harmonic_extension(&f, &vec![2.5; nd]).unwrap();
    assert!(constant.values.iter().all(|&x| (x - 2.5).abs() < 1e-10));
    assert!(constant.energy_inside.abs() < 1e-12);
    assert!(matches!(harmonic_extension(&f, &[1.0]), Err(Error::Usage(_))));
}

#[test]
fn disk_steklov_spectrum() {
    let m = planar_disk(1.0, 0.01).unwrap();
    let k = assemble_stiffness(&m).unwrap();
    let ds = assemble_boundary_mass(&m, |_| 1.0).unwrap();
    let r = generalized_eigs(&k, &ds, 4).unwrap();
    for (got, want) in r.eigenvalues[1..5].iter().zip([1.0, 1.0, 2.0, 2.0]) {
        assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
    }
    assert!((r.normalized[1] - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
    assert_eq!(r.eigenvalues[0], 0.0);

    // Rayleigh quotient of the exact first mode bounds σ₁ from above.
    let x: Vec<f64> = m.vertices.iter().map(|p| p[0]).collect();
    let rq = k.quad(&x) / ds.integrate(&x.iter().map(|v| v * v).collect::<Vec<_>>());
    assert!(rq >= r.eigenvalues[1] - 1e-12);

    // Eigenvectors are orthogonal to constants in the measure.
    for v in &r.eigenvectors[1..] {
        assert!(ds.integrate(v).abs() < 1e-10);
    }
}

#[test]
fn sphere_laplace_spectrum_and_refinement() {
    let s = ModelSurface::sphere();
    let mut values = Vec::new();
    for h in [0.04, 0.02, 0.01] {
        let m = mesh_closed_surface(&s, h).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let a = assemble_area_mass(&m, |_| 1.0).unwrap();
        let r = generalized_eigs(&k, &a, 4).unwrap();
        for l in &r.normalized[1..4] {
            assert!((l - 8.0 * PI).abs() < 0.005 * 8.0 * PI);
        }
        values.push(r.normalized[1]);
    }
    let (d1, d2) = ((values[1] - values[0]).abs(), (values[2] - values[1]).abs());
    assert!(d1 >= 3.0 * d2, "changes {d1} then {d2}");
}

#[test]
fn eigenvalues_scale_inversely_with_the_measure() {
    let m = icosphere(8);
    let k = assemble_stiffness(&m).unwrap();
    let a = assemble_area_mass(&m, |_| 1.0).unwrap();
    let base = generalized_eigs(&k, &a, 6).unwrap();
    for c in [0.1, 0.7, 3.0, 10.0] {
        let r = generalized_eigs(&k, &a.scaled(c), 6).unwrap();
        for (x, y) in r.eigenvalues.iter().zip(&base.eigenvalues).skip(1) {
            assert!((x * c - y).abs() <= 1e-12 * y, "c = {c}");
        }
        for (x, y) in r.normalized.iter().zip(&base.normalized).skip(1) {
            assert!((x - y).abs() <= 1e-12 * y);
        }
    }
}

#[test]
fn eigensolver_matches_a_dense_oracle() {
    let m = icosphere(3);
    let n = m.n_vertices();
    let k = assemble_stiffness(&m).unwrap();
    let w: Vec<f64> = (0..n).map(|i| 0.5 + ((i * 7) % 11) as f64 / 11.0).collect();
    let b = NodalMeasure::new(w.clone(), Support::Area, "w");
    let dense = k.to_dense();
    let scaled: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| dense[i][j] / (w[i] * w[j]).sqrt()).collect()).collect();
    let (oracle, _) = jacobi_eigen(scaled);
    let opts = EigenOptions { tol: 1e-11, ..EigenOptions::default() };
    let r = generalized_eigs_with(&k, &b, 12, &opts).unwrap();
    for i in 0..13 {
        assert!((r.eigenvalues[i] - oracle[i]).abs() <= 1e-8 * oracle[12], "{i}: {} vs {}", r.eigenvalues[i], oracle[i]);
    }
    assert!(matches!(generalized_eigs(&k, &b, n), Err(Error::Capacity(_))));
    let zero = NodalMeasure::new(vec![0.0; n], Support::Area, "zero");
    assert!(matches!(generalized_eigs(&k, &zero, 3), Err(Error::Degenerate(_))));
}
