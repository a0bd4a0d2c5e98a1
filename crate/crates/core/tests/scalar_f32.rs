//! The generic routines run in single precision and track the f64 results.

use nalgebra::{DMatrix, DVector};

use geopath::density::{density_breakdown, DensityConfig, Route};
use geopath::development::{coarsen, develop, sample_brownian, segment_guard, DrivingPath, Integrator};
use geopath::geometry::{gamma_operator, CurvatureInFrame, ManifoldSpec};
use geopath::jacobi::{solve_segment, JacobiMethod, SegmentOperator};
use geopath::wiener::{fredholm_nystrom, KernelDiscretization};

fn narrow(w: &DrivingPath<f64>) -> DrivingPath<f32> {
    DrivingPath::new(w.increments.iter().map(|v| v.map(|x| x as f32)).collect()).unwrap()
}

#[test]
fn flat_density_is_one_in_f32() {
    let m = ManifoldSpec::<f32>::euclidean(3).unwrap();
    let w = coarsen(&sample_brownian::<f32>(1, 0, 32, 3).unwrap(), 8).unwrap();
    let b = density_breakdown(&m, &w, &DensityConfig::default(), Route::Both).unwrap();
    assert!(b.log_rho_q.unwrap().abs() < 1e-5);
    assert!(b.log_rho_f.unwrap().abs() < 1e-5);
}

#[test]
fn sphere_density_tracks_f64() {
    let kappa = 0.08;
    let m64 = ManifoldSpec::sphere_with_curvature(2, kappa).unwrap();
    let m32 = ManifoldSpec::<f32>::sphere_with_curvature(2, kappa as f32).unwrap();
    let mut checked = 0;
    for j in 0..20 {
        let w = coarsen(&sample_brownian::<f64>(2, j, 64, 2).unwrap(), 8).unwrap();
        if !segment_guard(&w, kappa).ok() {
            continue;
        }
        let a = density_breakdown(&m64, &w, &DensityConfig::default(), Route::Both).unwrap();
        let b = density_breakdown(&m32, &narrow(&w), &DensityConfig::default(), Route::Both).unwrap();
        assert!((a.log_rho_q.unwrap() - b.log_rho_q.unwrap()).abs() < 1e-4);
        assert!((a.log_rho_f.unwrap() - b.log_rho_f.unwrap()).abs() < 1e-4);
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn development_and_jacobi_in_f32() {
    let m = ManifoldSpec::<f32>::sphere(2, 2.0).unwrap();
    let w = DrivingPath::new(vec![DVector::from_vec(vec![0.5f32, 0.25]); 4]).unwrap();
    let len = (2.0f32).hypot(1.0);
    let end = develop(&m, &w, 1, Integrator::Exact).unwrap().endpoint().clone();
    assert!((end[2] - 2.0 * (len / 2.0).cos()).abs() < 1e-5);
    let rk4 = develop(&m, &w, 32, Integrator::Rk4).unwrap().endpoint().clone();
    assert!((rk4 - &end).amax() < 1e-5);

    let op = SegmentOperator::constant(DMatrix::from_element(1, 1, -0.5f32), 0.8);
    let p = solve_segment(&op, 6, JacobiMethod::Spectral).unwrap();
    let q = solve_segment(&op, 6, JacobiMethod::Rk4 { substeps: 16 }).unwrap();
    let mu = 0.5f32.sqrt();
    assert!((p.end.c[(0, 0)] - (mu * 0.8).cos()).abs() < 1e-6);
    assert!((p.end.s[(0, 0)] - q.end.s[(0, 0)]).abs() < 1e-6);
}

#[test]
fn fredholm_in_f32() {
    let c = CurvatureInFrame::<f32>::constant(2, 0.5);
    let g = gamma_operator(&c);
    let k = KernelDiscretization::constant(32, &g).unwrap();
    let got = fredholm_nystrom(&k, 1.0f32 / 12.0).unwrap().log_det;
    let want = 2.0 * (0.25f64 * 4.0 / 12.0).sqrt().cosh().ln();
    assert!((got - want).abs() < 1e-4, "{got} vs {want}");
}

#[test]
fn f32_nystrom_accepts_non_dyadic_grids() {
    let g = DMatrix::<f32>::identity(2, 2) * 0.6;
    let k = KernelDiscretization::from_fn(40, |_| g.clone()).unwrap();
    let got = fredholm_nystrom(&k, 1.0f32 / 12.0).unwrap().log_det;
    assert!((got - 2.0 * (0.05f64).sqrt().cosh().ln()).abs() < 1e-4);
}
