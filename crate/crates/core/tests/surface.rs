use std::f64::consts::PI;

use steklab::surface::{sphere_radius, Lattice, ModelSurface, SurfaceDescriptor, SurfaceKind};
use steklab::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn model_surfaces_have_unit_area_and_gauss_bonnet_curvature() {
    let r = sphere_radius();
    assert!(close(4.0 * PI * r * r, 1.0, 1e-15));
    let s = ModelSurface::sphere();
    assert_eq!(s.euler_char(), 2);
    assert!(close(s.curvature(), 4.0 * PI, 1e-15));
    assert!(close(s.injectivity_radius(), PI.sqrt() / 2.0, 1e-15));
    for t in [ModelSurface::square_torus(), ModelSurface::equilateral_torus()] {
        assert_eq!(t.kind(), SurfaceKind::FlatTorus);
        assert_eq!(t.curvature(), 0.0);
        let [a, b] = t.lattice().unwrap().basis();
        assert!(close((a[0] * b[1] - a[1] * b[0]).abs(), 1.0, 1e-14));
    }
    assert!(close(ModelSurface::square_torus().injectivity_radius(), 0.5, 1e-15));
}

#[test]
fn hyperbolic_and_unknown_surfaces_are_rejected() {
    let err = ModelSurface::from_descriptor(&SurfaceDescriptor::Hyperbolic { genus: 2 }).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    assert!(SurfaceDescriptor::from_name("klein-bottle").is_err());
    assert!(Lattice::new([1.0, 0.0], [2.0, 0.0]).is_err());
}

#[test]
fn distances() {
    let s = ModelSurface::sphere();
    let r = sphere_radius();
    let p = [0.0, 0.0, r];
    assert_eq!(s.distance(&p, &p), 0.0);
    assert!(close(s.distance(&p, &[0.0, 0.0, -r]), PI.sqrt() / 2.0, 1e-12));
    assert!(close(s.distance(&p, &[r, 0.0, 0.0]), PI.sqrt() / 4.0, 1e-12));

    let t = ModelSurface::square_torus();
    assert!(close(t.distance(&[0.0, 0.0, 0.0], &[0.5, 0.5, 0.0]), 0.5f64.sqrt(), 1e-12));
    assert!(close(t.distance(&[0.05, 0.0, 0.0], &[0.95, 0.0, 0.0]), 0.1, 1e-12));
}

#[test]
fn disk_laws_match_closed_forms() {
    let t = ModelSurface::square_torus();
    assert!(close(t.disk_boundary_length(0.1).unwrap(), 0.628_318_530_7, 1e-9));
    assert!(close(t.disk_area(0.1).unwrap(), 0.031_415_926_5, 1e-9));
    let s = ModelSurface::sphere();
    let q = PI.sqrt() / 4.0;
    assert!(close(s.disk_boundary_length(q).unwrap(), PI.sqrt(), 1e-12));
    assert!(close(s.disk_area(q).unwrap(), 0.5, 1e-12));
    assert!(close(s.disk_area(PI.sqrt() / 2.0).unwrap(), 1.0, 1e-12));
    for surf in [&s, &t] {
        assert_eq!(surf.disk_boundary_length(0.0).unwrap(), 0.0);
        assert_eq!(surf.disk_area(0.0).unwrap(), 0.0);
        assert!(matches!(surf.disk_area(-0.1), Err(Error::Domain(_))));
        assert!(matches!(surf.disk_boundary_length(5.0), Err(Error::Domain(_))));
    }
}

#[test]
fn disk_area_derivative_is_boundary_length() {
    for s in [ModelSurface::sphere(), ModelSurface::equilateral_torus()] {
        let top = 0.95 * s.injectivity_radius();
        let h = 1e-5;
        for i in 1..40 {
            let t = top * i as f64 / 40.0;
            let fd = (s.disk_area(t + h).unwrap() - s.disk_area(t - h).unwrap()) / (2.0 * h);
            let l = s.disk_boundary_length(t).unwrap();
            assert!((fd - l).abs() <= 1e-6 * l, "t = {t}: {fd} vs {l}");
        }
    }
}

#[test]
fn length_bracket_holds_below_r0() {
    let s = ModelSurface::sphere();
    let r0 = s.r0();
    assert!(r0 > 0.0 && r0 < s.injectivity_radius());
    for i in 1..=200 {
        let t = r0 * i as f64 / 200.0;
        let l = s.disk_boundary_length(t).unwrap();
        let c = 2.0 * PI * t;
        assert!(l >= 0.75 * c - 1e-12 && l <= 1.25 * c + 1e-12);
        let a = s.disk_area(t).unwrap();
        assert!(a >= 0.75 * PI * t * t - 1e-12 && a <= 1.25 * PI * t * t + 1e-12);
    }
    // Just past r0 the lower bracket fails.
    let t = r0 * (1.0 + 1e-6);
    assert!(s.disk_boundary_length(t).unwrap() < 0.75 * 2.0 * PI * t);
    assert!(ModelSurface::square_torus().r0().is_infinite());
}

#[test]
fn geodesic_circles() {
    let s = ModelSurface::sphere();
    let c = s.normalize(&[0.3, -0.2, 0.9]);
    let pts = s.geodesic_circle_points(&c, 0.1, 8).unwrap();
    assert_eq!(pts.len(), 8);
    for p in &pts {
        assert!(close(s.distance(&c, p), 0.1, 1e-10));
    }
    assert!(matches!(s.geodesic_circle_points(&c, 1.0, 8), Err(Error::Domain(_))));

    let t = ModelSurface::square_torus();
    let pts = t.geodesic_circle_points(&[0.0, 0.0, 0.0], 0.05, 4).unwrap();
    let mut got: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let d = t.log_map(&[0.0, 0.0, 0.0], p);
            [(d[0] * 1e6).round() / 1e6, (d[1] * 1e6).round() / 1e6]
        })
        .collect();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, vec![[-0.05, 0.0], [0.0, -0.05], [0.0, 0.05], [0.05, 0.0]]);
}

#[test]
fn exp_and_log_are_inverse() {
    for s in [ModelSurface::sphere(), ModelSurface::equilateral_torus()] {
        let c = s.normalize(&[0.11, 0.37, 0.2]);
        for i in 0..24 {
            let a = 2.0 * PI * i as f64 / 24.0;
            let r = 0.8 * s.injectivity_radius() * (i + 1) as f64 / 24.0;
            let v = [r * a.cos(), r * a.sin()];
            let p = s.exp_map(&c, v);
            let w = s.log_map(&c, &p);
            assert!(close(v[0], w[0], 1e-10) && close(v[1], w[1], 1e-10), "{v:?} vs {w:?}");
            assert!(close(s.distance(&c, &p), r, 1e-10));
        }
    }
}

/// Flat torus eigenvalues from the dual lattice, computed independently of
/// the library: `w` ranges over integer combinations of the rows of `B^{-T}`.
fn dual_lattice_spectrum(basis: [[f64; 2]; 2], count: usize) -> Vec<f64> {
    let [a, b] = basis;
    let det = a[0] * b[1] - a[1] * b[0];
    let da = [b[1] / det, -b[0] / det];
    let db = [-a[1] / det, a[0] / det];
    let mut out = Vec::new();
    for i in -12i32..=12 {
        for j in -12i32..=12 {
            if (i, j) != (0, 0) {
                let w = [i as f64 * da[0] + j as f64 * db[0], i as f64 * da[1] + j as f64 * db[1]];
                out.push(4.0 * PI * PI * (w[0] * w[0] + w[1] * w[1]));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    out
}

#[test]
fn torus_first_eigenvalues() {
    let sq = ModelSurface::square_torus();
    let (l, m) = sq.lambda1();
    assert!(close(l, 4.0 * PI * PI, 1e-10));
    assert_eq!(m, 4);
    let eq = ModelSurface::equilateral_torus();
    let (l, m) = eq.lambda1();
    assert!(close(l, 8.0 * PI * PI / 3f64.sqrt(), 1e-10));
    assert_eq!(m, 6);
    assert_eq!(ModelSurface::sphere().lambda1(), (8.0 * PI, 3));

    for lat in [Lattice::square(), Lattice::equilateral(), Lattice::new([1.25, 0.0], [0.3, 0.8]).unwrap()] {
        let ours = lat.laplace_spectrum(30);
        let oracle = dual_lattice_spectrum(lat.basis(), 30);
        for (x, y) in ours.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-10 * y);
        }
    }
}
