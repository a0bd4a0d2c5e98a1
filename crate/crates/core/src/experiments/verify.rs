use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{ExperimentConfig, TestFunction};
use super::convergence::run_convergence;
use crate::density::{
    build_f, build_q, cov, density_breakdown, det_expansion, factorize, matrix_inequalities, rho_via_f, rho_via_q,
    segment_pairs, CovarianceModel, DensityConfig, Route,
};
use crate::development::{antidevelop, coarsen, develop, path_energy, sample_brownian, DrivingPath, Integrator};
use crate::error::Result;
use crate::geometry::{
    curvature_bound_check, curvature_in_frame, gamma_operator, scalar_curvature, tidal_operator, CurvatureInFrame,
    ManifoldSpec,
};
use crate::jacobi::{estimate_suite, psi, solve_segment, Envelope, JacobiMethod, SegmentOperator};
use crate::linalg;
use crate::quadrature::GaussLegendre;
use crate::wiener::{
    fredholm_nystrom, fredholm_series, gamma_k_discrete, min_kernel_psd_check, KernelDiscretization, KERNEL_SCALE,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Check = fn() -> Result<(bool, String)>;

fn random_driver(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> DrivingPath<f64> {
    let inc = (0..n)
        .map(|_| DVector::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt()))
        .collect();
    DrivingPath::new(inc).expect("n ≥ 1")
}

/// Draws guard-passing Brownian coarsenings on the sphere of curvature `kappa`.
fn sphere_instances(kappa: f64, count: usize) -> Result<(ManifoldSpec<f64>, Vec<DrivingPath<f64>>)> {
    let m = ManifoldSpec::sphere_with_curvature(2, kappa)?;
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count {
        let n = [2usize, 4, 8, 16][out.len() % 4];
        let fine = sample_brownian::<f64>(11, index, 64, 2)?;
        index += 1;
        let c = coarsen(&fine, n)?;
        if crate::development::segment_guard(&c, kappa).ok() {
            out.push(c);
        }
    }
    Ok((m, out))
}

fn check_flat_identity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0f64;
    for d in 1..=3 {
        let m = ManifoldSpec::euclidean(d)?;
        for n in [2, 4, 8, 16, 32] {
            for _ in 0..10 {
                let b = density_breakdown(&m, &random_driver(&mut rng, n, d, 1.0), &DensityConfig::default(), Route::Both)?;
                worst = worst.max(b.log_rho_q.unwrap_or(f64::NAN).abs()).max(b.log_rho_f.unwrap_or(f64::NAN).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max |log ρ| = {worst:.2e}")))
}

fn check_routes_and_factorization() -> Result<(bool, String)> {
    let (m, drivers) = sphere_instances(0.08, 20)?;
    let (mut route, mut ident) = (0f64, 0f64);
    for w in &drivers {
        let b = density_breakdown(&m, w, &DensityConfig::default(), Route::Factorized)?;
        let q = density_breakdown(&m, w, &DensityConfig::default(), Route::Q)?;
        route = route.max((q.log_rho_q.unwrap_or(f64::NAN) - b.log_rho_f.unwrap_or(f64::NAN)).abs());
        ident = ident.max(b.identity_rel_error.unwrap_or(f64::NAN));
    }
    Ok((route <= 1e-6 && ident <= 1e-8, format!("route gap {route:.2e}, identity {ident:.2e}")))
}

fn check_gram_at_zero() -> Result<(bool, String)> {
    let (m, drivers) = sphere_instances(0.08, 8)?;
    let mut worst = 0f64;
    for w in &drivers {
        let (pairs, _) = segment_pairs(&m, w, &DensityConfig::default())?;
        let r = rho_via_f(&build_f(&pairs)?)?;
        worst = worst.max(((r.gram_log_det - r.expected_gram_log_det) / r.expected_gram_log_det).abs());
    }
    Ok((worst <= 1e-10, format!("relative gap {worst:.2e}")))
}

fn check_covariance_constants() -> Result<(bool, String)> {
    let delta = 0.125f64;
    let g = GaussLegendre::<f64>::new(8);
    let (s, w) = g.on(0.0, delta);
    let alpha: Vec<DMatrix<f64>> = s.iter().map(|&x| DMatrix::from_element(1, 1, x * x / 2.0 - delta * delta / 6.0)).collect();
    let beta: Vec<DMatrix<f64>> = s
        .iter()
        .map(|&x| DMatrix::from_element(1, 1, x * delta - x * x / 2.0 - delta * delta / 3.0))
        .collect();
    let d4 = delta.powi(4);
    let aa = cov(&alpha, &alpha, &w, delta)[(0, 0)];
    let ab = cov(&alpha, &beta, &w, delta)[(0, 0)];
    let e1 = (aa - d4 / 45.0).abs() / d4;
    let e2 = (ab - 7.0 * d4 / 360.0).abs() / d4;
    Ok((e1 <= 1e-12 && e2 <= 1e-12, format!("relative errors {e1:.1e}, {e2:.1e}")))
}

fn check_fredholm() -> Result<(bool, String)> {
    let mut worst_oracle = 0f64;
    let mut worst_series = 0f64;
    let mut remainder_ok = true;
    for c in [0.1f64, 0.5] {
        let g = DMatrix::identity(2, 2) * (12.0 * c);
        let k = KernelDiscretization::constant(64, &g)?;
        let ny = fredholm_nystrom(&k, KERNEL_SCALE)?.log_det;
        let oracle = 2.0 * c.sqrt().cosh().ln();
        let se = fredholm_series(&k, KERNEL_SCALE, 30)?;
        worst_oracle = worst_oracle.max((ny - oracle).abs());
        worst_series = worst_series.max((se.gamma - ny).abs());
        remainder_ok &= (se.gamma - oracle).abs() <= se.remainder_bound + 1e-8;
    }
    Ok((
        worst_oracle <= 1e-8 && worst_series <= 1e-6 && remainder_ok,
        format!("oracle {worst_oracle:.2e}, series {worst_series:.2e}"),
    ))
}

fn check_bound_suites() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let kappa = rng.random_range(0.0..2.0);
        let v = DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let delta = rng.random_range(0.05..1.0) / (kappa * v.norm_squared()).sqrt().max(1.0);
        let a = tidal_operator(&CurvatureInFrame::constant(2, kappa), &v);
        let op = SegmentOperator::constant(a, delta);
        let pair = solve_segment(&op, 8, JacobiMethod::Spectral)?;
        worst = worst.min(estimate_suite(&pair, &op).min_margin);
    }
    let mut ok = worst >= -1e-10;
    for _ in 0..200 {
        let n = rng.random_range(1..6);
        let x = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let psd = &x * x.transpose();
        let u = &psd * (0.9 / linalg::spectral_norm(&psd));
        let e = det_expansion(&u, 3)?;
        ok &= e.remainder.abs() <= e.remainder_bound + 1e-12;
        let pd = &psd + DMatrix::identity(n, n) * 0.1;
        ok &= matrix_inequalities(&pd, &x, &psd, 1.0)?.holds(1e-10);
    }
    let (gap, sup_g, sup_tu) = Envelope::default().scan(60.0, 60_000);
    ok &= gap >= 0.0 && sup_g <= 0.6 + 1e-12 && sup_tu <= 0.63;
    ok &= (0..200).all(|i| {
        let s = i as f64 * 0.1;
        psi(s) <= s.cosh()
    });
    let c = CurvatureInFrame::random(3, 0.01, &mut rng);
    let r = curvature_bound_check(&c, 300, &mut rng);
    ok &= r.bound_34_3_holds && r.pair_bound_holds;
    Ok((ok, format!("min Jacobi margin {worst:.2e}, sup t·u {sup_tu:.4}")))
}

fn check_curvature() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = ManifoldSpec::sphere(3, 1.0 / 0.05f64.sqrt())?;
    let f = m.origin();
    let c = curvature_in_frame(&m, &f)?;
    let q = linalg::polar_orthonormalize(&DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal)))?;
    let cr = curvature_in_frame(&m, &f.rotate(&q))?;
    let scal = scalar_curvature(&c);
    let inv = (scal - scalar_curvature(&cr)).abs() + linalg::max_abs_diff(&gamma_operator(&c), &gamma_operator(&cr));
    let ok = (scal - 0.3).abs() <= 1e-12 && inv <= 1e-10 && c.symmetry_residual() <= 1e-12;
    Ok((ok, format!("Scal {scal:.12}, rotation residual {inv:.1e}")))
}

fn check_development() -> Result<(bool, String)> {
    let m = ManifoldSpec::sphere(2, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut energy, mut trip) = (0f64, 0f64);
    for _ in 0..20 {
        let w = random_driver(&mut rng, 16, 2, 1.0);
        let sigma = develop(&m, &w, 4, Integrator::Exact)?;
        energy = energy.max((path_energy(&m, &sigma) - w.energy()).abs() / (1.0 + w.energy()));
        let back = develop(&m, &antidevelop(&m, &sigma)?, 4, Integrator::Exact)?;
        for (a, b) in sigma.nodes.iter().zip(&back.nodes) {
            trip = trip.max((&a.point - &b.point).norm());
        }
    }
    Ok((energy <= 1e-8 && trip <= 1e-6, format!("energy {energy:.1e}, round trip {trip:.1e}")))
}

fn check_min_kernel_and_lambda() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let pts: Vec<f64> = (0..rng.random_range(1..=50)).map(|_| rng.random::<f64>()).collect();
        worst = worst.min(min_kernel_psd_check(&pts));
    }
    let g = DMatrix::identity(2, 2) * 6.0;
    let exact = [1.0 / 2.0, 1.0 / 6.0, 1.0 / 15.0];
    let mut mono = true;
    for (k, sk) in exact.iter().enumerate() {
        let target = 2.0 * 0.5f64.powi(k as i32 + 1) * sk;
        let errs: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| gamma_k_discrete(&vec![g.clone(); n + 1], k + 1).map(|v| (v - target).abs()))
            .collect::<Result<_>>()?;
        mono &= errs.windows(2).all(|w| w[1] < w[0]);
    }
    Ok((worst >= -1e-12 && mono, format!("min eigenvalue {worst:.2e}")))
}

fn check_flat_convergence_and_determinism() -> Result<(bool, String)> {
    let mut cfg = ExperimentConfig::default();
    cfg.manifold = ManifoldSpec::euclidean(2)?;
    cfg.samples = 50;
    cfg.n_fine = 64;
    let a = run_convergence(&cfg)?;
    let flat_zero = a.rows.iter().all(|r| r.diff.abs() <= 1e-12);
    cfg.manifold = ManifoldSpec::sphere(2, 6.0)?;
    cfg.test_function = TestFunction::EndpointCosDist;
    let x = serde_json::to_string(&run_convergence(&cfg)?)?;
    let y = serde_json::to_string(&run_convergence(&cfg)?)?;
    Ok((flat_zero && x == y, format!("flat paired differences zero: {flat_zero}, repeat identical: {}", x == y)))
}

/// Negated tidal operator must break the focusing bounds.
fn mutation_sign_flip() -> Result<(bool, String)> {
    let v = DVector::from_vec(vec![1.2, -0.4]);
    let a = tidal_operator(&CurvatureInFrame::constant(2, 0.5), &v);
    let op = SegmentOperator::constant(-a, 0.8);
    let r = estimate_suite(&solve_segment(&op, 8, JacobiMethod::Spectral)?, &op);
    Ok((r.min_margin < -1e-10, format!("mutant min margin {:.2e}", r.min_margin)))
}

/// A wrong diagonal constant in `C^n` must fail the factorization check.
fn mutation_wrong_constant() -> Result<(bool, String)> {
    let (m, drivers) = sphere_instances(0.08, 1)?;
    let (pairs, scaled) = segment_pairs(&m, &drivers[0], &DensityConfig::default())?;
    let f = build_f(&pairs)?;
    let r = rho_via_f(&f)?;
    let model = CovarianceModel { diagonal: 1.0 / 44.0, ..CovarianceModel::default() };
    let fz = factorize(&f, &scaled, r.log_rho, model)?;
    let _ = rho_via_q(&build_q(&pairs)?)?;
    Ok((!fz.passes(1e-8), format!("mutant model error {:.2e}", fz.model_rel_error)))
}

/// Runs every check once, in a fixed order.
pub fn run_verify() -> VerifyReport {
    let checks: [(&str, Check); 12] = [
        ("flat identity", check_flat_identity),
        ("route agreement and factorization", check_routes_and_factorization),
        ("Gram determinant at zero", check_gram_at_zero),
        ("covariance constants", check_covariance_constants),
        ("Fredholm oracle and series", check_fredholm),
        ("Jacobi, perturbation and envelope bounds", check_bound_suites),
        ("curvature contractions", check_curvature),
        ("development isometry and round trip", check_development),
        ("min kernel and Λ sums", check_min_kernel_and_lambda),
        ("flat convergence and determinism", check_flat_convergence_and_determinism),
        ("mutation: tidal sign flip detected", mutation_sign_flip),
        ("mutation: 1/44 constant detected", mutation_wrong_constant),
    ];
    let checks = checks
        .iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f() {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult { name: name.to_string(), passed, detail, millis: t.elapsed().as_secs_f64() * 1e3 }
        })
        .collect();
    VerifyReport { checks }
}
