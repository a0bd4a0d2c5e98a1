//! Piecewise-geodesic density `ρ_n` by the Gram route, the `F` route and the block factorization.

pub mod block;
pub mod factor;
pub mod froute;
pub mod perturb;
pub mod qroute;
pub mod ui;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use block::BlockMatrix;
pub use factor::{cov, factorize, CovarianceModel, Factorization};
pub use froute::{build_f, rho_via_f, FData, FRho};
pub use perturb::{det_expansion, matrix_inequalities, DetExpansion, InequalityReport};
pub use qroute::{build_q, propagators, rho_via_q};
pub use ui::{ui_bound, UiBound};

use crate::development::{develop, segment_guard, DrivingPath, Integrator};
use crate::error::Result;
use crate::geometry::{curvature_in_frame, tidal_operator, ManifoldSpec};
use crate::jacobi::{solve_segment, JacobiMethod, JacobiPair, SegmentOperator};
use crate::scalar::Real;

/// Which determinant formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Q,
    F,
    Both,
    Factorized,
}

impl std::str::FromStr for Route {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q" => Ok(Route::Q),
            "f" => Ok(Route::F),
            "both" => Ok(Route::Both),
            "factorized" => Ok(Route::Factorized),
            other => Err(crate::error::Error::Argument(format!("unknown route `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    /// Gauss–Legendre nodes per segment.
    pub quad_nodes: usize,
    pub method: JacobiMethod,
    pub model: CovarianceModel,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { quad_nodes: 8, method: JacobiMethod::Spectral, model: CovarianceModel::default() }
    }
}

/// Log-determinant ledger for one driver. Fields are `None` when not requested or when the guard failed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DensityBreakdown {
    pub log_rho_q: Option<f64>,
    pub log_rho_f: Option<f64>,
    pub log_det_v2: Option<f64>,
    pub log_det_iu: Option<f64>,
    pub log_det_ix: Option<f64>,
    pub guard_ok: bool,
    /// First segment whose increment reaches the guard radius.
    pub guard_violation: Option<usize>,
    pub gram_log_det: Option<f64>,
    pub expected_gram_log_det: Option<f64>,
    pub identity_rel_error: Option<f64>,
    pub model_rel_error: Option<f64>,
    pub remainder_ratio: Option<f64>,
}

/// Tidal operators `A_i` per segment on a developed driver, plus `A_i(0)Δ²`.
pub fn segment_operators<T: Real>(
    m: &ManifoldSpec<T>,
    omega: &DrivingPath<T>,
) -> Result<(Vec<SegmentOperator<T>>, Vec<DMatrix<T>>)> {
    let sigma = develop(m, omega, 1, Integrator::Exact)?;
    let delta = T::one() / T::count(omega.n());
    let mut ops = Vec::with_capacity(omega.n());
    let mut scaled = Vec::with_capacity(omega.n());
    for (i, inc) in omega.increments.iter().enumerate() {
        let c = curvature_in_frame(m, &sigma.nodes[i])?;
        let a = tidal_operator(&c, &omega.velocity(i));
        scaled.push(tidal_operator(&c, inc));
        ops.push(SegmentOperator::constant(a, delta));
    }
    Ok((ops, scaled))
}

/// Jacobi pairs for every segment of `omega`.
pub fn segment_pairs<T: Real>(
    m: &ManifoldSpec<T>,
    omega: &DrivingPath<T>,
    cfg: &DensityConfig,
) -> Result<(Vec<JacobiPair<T>>, Vec<DMatrix<T>>)> {
    let (ops, scaled) = segment_operators(m, omega)?;
    let pairs = ops
        .iter()
        .map(|a| solve_segment(a, cfg.quad_nodes, cfg.method))
        .collect::<Result<Vec<_>>>()?;
    Ok((pairs, scaled))
}

/// Evaluates the requested routes for one driver.
pub fn density_breakdown<T: Real>(
    m: &ManifoldSpec<T>,
    omega: &DrivingPath<T>,
    cfg: &DensityConfig,
    route: Route,
) -> Result<DensityBreakdown> {
    let guard = segment_guard(omega, m.curvature_bound().as_f64());
    let mut out = DensityBreakdown { guard_ok: guard.ok(), guard_violation: guard.violation, ..Default::default() };
    if !guard.ok() {
        return Ok(out);
    }
    let (pairs, scaled) = segment_pairs(m, omega, cfg)?;
    if matches!(route, Route::Q | Route::Both) {
        let q = build_q(&pairs)?;
        out.log_rho_q = Some(rho_via_q(&q)?.as_f64());
    }
    if matches!(route, Route::F | Route::Both | Route::Factorized) {
        let f = build_f(&pairs)?;
        let r = rho_via_f(&f)?;
        out.log_rho_f = Some(r.log_rho.as_f64());
        out.gram_log_det = Some(r.gram_log_det.as_f64());
        out.expected_gram_log_det = Some(r.expected_gram_log_det.as_f64());
        if route == Route::Factorized {
            let fz = factorize(&f, &scaled, r.log_rho, cfg.model)?;
            out.log_det_v2 = Some(fz.log_det_v2.as_f64());
            out.log_det_iu = Some(fz.log_det_iu.as_f64());
            out.log_det_ix = Some(fz.log_det_ix.as_f64());
            out.identity_rel_error = Some(fz.identity_rel_error.as_f64());
            out.model_rel_error = Some(fz.model_rel_error.as_f64());
            out.remainder_ratio = Some(fz.remainder_ratio.as_f64());
        }
    }
    Ok(out)
}
