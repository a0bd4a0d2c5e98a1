use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use geopath::geometry::{tidal_operator, CurvatureInFrame};
use geopath::jacobi::{
    estimate_suite, h_fn, psi, solve_segment, wronskian_residual, Envelope, JacobiMethod, JacobiPair, JacobiSample,
    SegmentOperator,
};

fn random_symmetric(r: &mut ChaCha8Rng, d: usize, scale: f64) -> DMatrix<f64> {
    let x = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(r));
    (&x + x.transpose()) * (0.5 * scale)
}

fn max_gap(a: &JacobiPair<f64>, b: &JacobiPair<f64>) -> f64 {
    let gap = |x: &JacobiSample<f64>, y: &JacobiSample<f64>| {
        [(&x.c - &y.c).amax(), (&x.s - &y.s).amax(), (&x.dc - &y.dc).amax(), (&x.ds - &y.ds).amax()]
            .into_iter()
            .fold(0.0, f64::max)
    };
    a.at_nodes
        .iter()
        .zip(&b.at_nodes)
        .map(|(x, y)| gap(x, y))
        .fold(gap(&a.end, &b.end), f64::max)
}

#[test]
fn rk4_agrees_with_spectral_on_constant_segments() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let d = r.random_range(1..=4);
        let delta = r.random_range(0.01..1.0);
        let scale = r.random_range(0.0..3.0);
        let a = random_symmetric(&mut r, d, scale);
        let op = SegmentOperator::constant(a, delta);
        let spectral = solve_segment(&op, 8, JacobiMethod::Spectral).unwrap();
        let fine = solve_segment(&op, 8, JacobiMethod::Rk4 { substeps: 64 }).unwrap();
        assert!(max_gap(&spectral, &fine) < 1e-8);
        if op.kappa_bound * delta * delta <= 1.0 {
            let rk4 = solve_segment(&op, 8, JacobiMethod::Rk4 { substeps: 16 }).unwrap();
            assert!(max_gap(&spectral, &rk4) < 1e-8);
        }
        assert_eq!(spectral.nodes, fine.nodes);
    }
}

#[test]
fn initial_conditions_are_exact() {
    let op = SegmentOperator::constant(DMatrix::from_row_slice(2, 2, &[-0.5, 0.1, 0.1, -0.2]), 0.3);
    for method in [JacobiMethod::Spectral, JacobiMethod::Rk4 { substeps: 3 }] {
        let p = solve_segment(&op, 5, method).unwrap();
        assert_eq!(p.start, JacobiSample::initial(2));
        assert_eq!(p.start.c, DMatrix::identity(2, 2));
        assert_eq!(p.start.ds, DMatrix::identity(2, 2));
    }
}

#[test]
fn scalar_segments_match_trigonometric_solutions() {
    for lambda in [0.0f64, 0.3, 2.0] {
        let delta = 0.9;
        let op = SegmentOperator::constant(DMatrix::from_element(1, 1, -lambda), delta);
        let p = solve_segment(&op, 6, JacobiMethod::Spectral).unwrap();
        let mu = lambda.sqrt();
        for (s, smp) in p.points() {
            let (c, sn) = if lambda == 0.0 { (1.0, s) } else { ((mu * s).cos(), (mu * s).sin() / mu) };
            let (dc, ds) = if lambda == 0.0 { (0.0, 1.0) } else { (-mu * (mu * s).sin(), (mu * s).cos()) };
            assert!((smp.c[(0, 0)] - c).abs() < 1e-14);
            assert!((smp.s[(0, 0)] - sn).abs() < 1e-14);
            assert!((smp.dc[(0, 0)] - dc).abs() < 1e-14);
            assert!((smp.ds[(0, 0)] - ds).abs() < 1e-14);
        }
    }
}

#[test]
fn variable_coefficient_against_closed_form() {
    // z″ = 2z/(1+s)² is solved by (1+s)² and 1/(1+s).
    let op = SegmentOperator::variable(|s: f64| DMatrix::from_element(1, 1, 2.0 / (1.0 + s).powi(2)), 0.8, 2.0);
    let p = solve_segment(&op, 8, JacobiMethod::Rk4 { substeps: 32 }).unwrap();
    for (s, smp) in p.points() {
        let (u, v) = ((1.0 + s).powi(2), 1.0 / (1.0 + s));
        let (du, dv) = (2.0 * (1.0 + s), -1.0 / (1.0 + s).powi(2));
        assert!((smp.c[(0, 0)] - (u + 2.0 * v) / 3.0).abs() < 1e-10);
        assert!((smp.s[(0, 0)] - (u - v) / 3.0).abs() < 1e-10);
        assert!((smp.dc[(0, 0)] - (du + 2.0 * dv) / 3.0).abs() < 1e-10);
        assert!((smp.ds[(0, 0)] - (du - dv) / 3.0).abs() < 1e-10);
    }
    assert!(solve_segment(&op, 8, JacobiMethod::Spectral).is_err());
    assert!(solve_segment(&op, 8, JacobiMethod::Rk4 { substeps: 0 }).is_err());
}

#[test]
fn jacobi_field_matches_geodesic_spread_on_the_sphere() {
    // Geodesics exp_o(s(v ± εw)) on S²(r); their ambient separation along w is S(s)w.
    let radius = 1.3;
    let kappa = 1.0 / (radius * radius);
    let v = DVector::from_vec(vec![0.8, 0.0]);
    let w = DVector::from_vec(vec![0.0, 1.0]);
    let exp = |u: &DVector<f64>, s: f64| {
        let speed = u.norm();
        let th = speed * s / radius;
        DVector::from_vec(vec![radius * th.sin() * u[0] / speed, radius * th.sin() * u[1] / speed, radius * th.cos()])
    };
    let a = tidal_operator(&CurvatureInFrame::constant(2, kappa), &v);
    let delta = 1.5;
    let p = solve_segment(&SegmentOperator::constant(a, delta), 8, JacobiMethod::Spectral).unwrap();
    let eps = 1e-5;
    for (s, smp) in p.points() {
        let fd = (exp(&(&v + &w * eps), s) - exp(&(&v - &w * eps), s)) / (2.0 * eps);
        let along_w = fd[1];
        assert!((along_w - (&smp.s * &w)[1]).abs() < 1e-8, "s={s}");
        assert!((&smp.s * &w)[0].abs() < 1e-14);
    }
}

#[test]
fn wronskian_identity_and_bound_suite() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let kappa: f64 = r.random_range(0.0..3.0);
        let v = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut r));
        let a = tidal_operator(&CurvatureInFrame::constant(3, kappa), &v);
        let delta = 1.0 / (kappa * v.norm_squared()).sqrt().max(1.0);
        let op = SegmentOperator::constant(a, delta);
        let p = solve_segment(&op, 8, JacobiMethod::Spectral).unwrap();
        assert!(wronskian_residual(&p, &op) < 1e-10);
        let rep = estimate_suite(&p, &op);
        assert!(rep.hypothesis_holds);
        assert!(rep.min_margin >= -1e-10, "{}", rep.min_margin);
        assert_eq!(rep.points.len(), 9);
    }
}

#[test]
fn suite_flags_positive_curvature_violation() {
    let op = SegmentOperator::constant(DMatrix::identity(2, 2) * 0.5, 1.0);
    let p = solve_segment(&op, 8, JacobiMethod::Spectral).unwrap();
    assert!(!estimate_suite(&p, &op).hypothesis_holds);
}

#[test]
fn envelope_functions() {
    assert_eq!(psi(0.0f64), 1.0);
    assert_eq!(h_fn(0.0f64), 0.0);
    let env = Envelope::default();
    let t0 = env.t0;
    assert!((env.g(t0 + 1e-12) - env.g(t0)).abs() < 1e-9);
    assert!((env.g(2.0 * t0) - env.height).abs() < 1e-12 || env.g(2.0 * t0) >= h_fn(2.0 * t0));
    assert!((env.u(0.1f64) - 1.0).abs() < 1e-15);
    let (gap, sup_g, sup_tu) = env.scan(50.0, 50_000);
    assert!(gap >= 0.0);
    assert!(sup_g <= 0.6 + 1e-12);
    assert!(sup_tu <= 0.63);
    for i in 1..200 {
        let t = i as f64 * 0.05;
        assert!((env.phi(t.sqrt()) - (t * env.g(t)).exp()).abs() < 1e-12 * env.phi(t.sqrt()));
    }
}
