use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// `log det(I+U)` against its truncated trace series `Ψ_r(U)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetExpansion<T> {
    pub log_det: T,
    pub psi_r: T,
    /// `|log det(I+U) − Ψ_r(U)|`.
    pub remainder: T,
    /// `tr U^{r+1}/(r+1)` when `U` is positive semidefinite.
    pub psd_bound: Option<T>,
    /// `d‖U‖^{r+1}/(1 − ‖U‖)` when `‖U‖ < 1`.
    pub norm_bound: Option<T>,
    /// Tightest applicable bound.
    pub remainder_bound: T,
}

/// `Ψ_r(U) = Σ_{k=1}^{r} (−1)^{k+1} tr(U^k)/k`.
pub fn psi_series<T: Real>(u: &DMatrix<T>, r: usize) -> T {
    let mut p = u.clone();
    let mut acc = T::zero();
    for k in 1..=r {
        let term = p.trace() / T::count(k);
        acc += if k % 2 == 1 { term } else { -term };
        p = &p * u;
    }
    acc
}

fn mat_pow<T: Real>(u: &DMatrix<T>, k: usize) -> DMatrix<T> {
    (0..k).fold(DMatrix::identity(u.nrows(), u.ncols()), |acc, _| acc * u)
}

pub fn det_expansion<T: Real>(u: &DMatrix<T>, r: usize) -> Result<DetExpansion<T>> {
    let d = u.nrows();
    let sym_tol = T::tol(1e-12) * (T::one() + linalg::max_abs(u));
    let symmetric = linalg::max_abs_diff(u, &u.transpose()) <= sym_tol;
    let psd = symmetric && linalg::sym_eigenvalues(u).first().is_none_or(|&e| e >= -sym_tol);
    let norm = linalg::spectral_norm(u);
    let contracting = norm < T::one();
    if !psd && !contracting {
        return Err(Error::Argument("expansion needs ‖U‖ < 1 or U positive semidefinite".into()));
    }
    let eye = DMatrix::identity(d, d);
    let (log_det, sign) = linalg::log_abs_det(&(&eye + u))?;
    if sign <= T::zero() {
        return Err(Error::Numeric("det(I+U) is not positive".into()));
    }
    let psi_r = psi_series(u, r);
    let next = mat_pow(u, r + 1).trace() / T::count(r + 1);
    let psd_bound = psd.then_some(next);
    let norm_bound = contracting.then(|| T::count(d) * norm.powi(r as i32 + 1) / (T::one() - norm));
    let remainder_bound = match (psd_bound, norm_bound) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!(),
    };
    Ok(DetExpansion { log_det, psi_r, remainder: (log_det - psi_r).abs(), psd_bound, norm_bound, remainder_bound })
}

/// Slack (`rhs − lhs`) of each matrix inequality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityReport<T> {
    /// `‖A‖ tr B − |tr(AB)|`.
    pub trace_product: T,
    /// `(tr M/N)^N − det M`, in logs.
    pub am_gm: T,
    /// `N log α + tr(α^{-1}M − I) − log det M`.
    pub alpha_bound: T,
    /// `N log α + α^{-1}tr(M − I) − log det M`, present when `α ≥ 1`.
    pub alpha_ge_one_bound: Option<T>,
}

impl<T: Real> InequalityReport<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.trace_product >= -tol
            && self.am_gm >= -tol
            && self.alpha_bound >= -tol
            && self.alpha_ge_one_bound.is_none_or(|x| x >= -tol)
    }
}

pub fn matrix_inequalities<T: Real>(
    m: &DMatrix<T>,
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    alpha: T,
) -> Result<InequalityReport<T>> {
    let tol = T::tol(1e-12);
    if linalg::sym_eigenvalues(b)[0] < -tol * (T::one() + linalg::max_abs(b)) {
        return Err(Error::Argument("B must be positive semidefinite".into()));
    }
    if !(alpha > T::zero()) {
        return Err(Error::Argument("α must be positive".into()));
    }
    let log_det = linalg::log_det_spd(m).map_err(|_| Error::Argument("M must be positive definite".into()))?;
    let nn = T::count(m.nrows());
    let tr = m.trace();
    let trace_product = linalg::spectral_norm(a) * b.trace() - (a * b).trace().abs();
    let am_gm = nn * (tr / nn).ln() - log_det;
    let alpha_bound = nn * alpha.ln() + (tr / alpha - nn) - log_det;
    let alpha_ge_one_bound = (alpha >= T::one()).then(|| nn * alpha.ln() + (tr - nn) / alpha - log_det);
    Ok(InequalityReport { trace_product, am_gm, alpha_bound, alpha_ge_one_bound })
}
