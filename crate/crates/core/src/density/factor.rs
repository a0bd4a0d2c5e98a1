use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::block::BlockMatrix;
use super::froute::FData;
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// `Cov(A, B) = ⟨AᵀB⟩ − ⟨A⟩ᵀ⟨B⟩` with `⟨X⟩ = Δ^{-1}∫_0^Δ X`.
pub fn cov<T: Real>(a: &[DMatrix<T>], b: &[DMatrix<T>], weights: &[T], delta: T) -> DMatrix<T> {
    assert_eq!(a.len(), weights.len());
    assert_eq!(b.len(), weights.len());
    let inv = T::one() / delta;
    let mut ab = DMatrix::zeros(a[0].ncols(), b[0].ncols());
    let mut ma = DMatrix::zeros(a[0].nrows(), a[0].ncols());
    let mut mb = DMatrix::zeros(b[0].nrows(), b[0].ncols());
    for ((x, y), &w) in a.iter().zip(b).zip(weights) {
        let wk = w * inv;
        ab += x.transpose() * y * wk;
        ma += x * wk;
        mb += y * wk;
    }
    ab - ma.transpose() * mb
}

/// Weights of the leading-order covariance model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    /// `⟨α²⟩/Δ⁴ = ⟨β²⟩/Δ⁴`.
    pub diagonal: f64,
    /// `⟨αβ⟩/Δ⁴`.
    pub off_diagonal: f64,
}

impl Default for CovarianceModel {
    fn default() -> Self {
        CovarianceModel { diagonal: 1.0 / 45.0, off_diagonal: 7.0 / 360.0 }
    }
}

/// `C^n` from `a_i = A_i(0)Δ²`.
pub fn model_covariance<T: Real>(a: &[DMatrix<T>], model: CovarianceModel) -> BlockMatrix<T> {
    let n = a.len();
    let d = a[0].nrows();
    let sq: Vec<_> = a.iter().map(|x| x * x).collect();
    let dg = T::lit(model.diagonal);
    let off = T::lit(model.off_diagonal);
    BlockMatrix::from_blocks(n, d, |i, j| {
        if i == j {
            let next = if i + 1 < n { sq[i + 1].clone() } else { DMatrix::zeros(d, d) };
            Some((&sq[i] + next) * dg)
        } else if i == j + 1 {
            Some(&sq[i] * off)
        } else if j == i + 1 {
            Some(&sq[j] * off)
        } else {
            None
        }
    })
}

/// `Cov(K, K)` for the leading-order blocks `K_ii = a_i s²/(2Δ²)`,
/// `K_{i,i−1} = a_i (sΔ − s²/2)/Δ²`, by Gauss–Legendre quadrature.
pub fn leading_order_covariance<T: Real>(a: &[DMatrix<T>], delta: T, quad_nodes: usize) -> BlockMatrix<T> {
    let n = a.len();
    let d = a[0].nrows();
    let (s, w) = GaussLegendre::<T>::new(quad_nodes).on(T::zero(), delta);
    let d2 = delta * delta;
    let half = T::lit(0.5);
    let samples: Vec<DMatrix<T>> = s
        .iter()
        .map(|&x| {
            BlockMatrix::from_blocks(n, d, |i, j| {
                if i == j {
                    Some(&a[i] * (x * x * half / d2))
                } else if i == j + 1 {
                    Some(&a[i] * ((x * delta - x * x * half) / d2))
                } else {
                    None
                }
            })
            .dense
        })
        .collect();
    BlockMatrix::from_dense(n, d, cov(&samples, &samples, &w, delta))
}

/// Terms of `det⟨FᵀF⟩ = det(V)²·det(I+U)·det(I+X)` and their consistency checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Factorization<T> {
    pub log_det_v2: T,
    pub log_det_iu: T,
    pub log_det_ix: T,
    /// `|2 log ρ_F − (log det V² + log det(I+U) + log det(I+X))|` divided by the largest term.
    pub identity_rel_error: T,
    /// `max |⟨G⟩ − T·D|`.
    pub mean_residual: T,
    /// `max |C^n − Cov(K, K)| / max |C^n|`.
    pub model_rel_error: T,
    /// `‖M − C^n‖`.
    pub remainder_norm: T,
    /// `‖M − C^n‖ / (max_i ‖a_i‖)^{5/2}`.
    pub remainder_ratio: T,
    pub min_eig_iu: T,
}

impl<T: Real> Factorization<T> {
    /// Identity within `tol` and model constants consistent at `1e-12`.
    pub fn passes(&self, tol: T) -> bool {
        self.identity_rel_error <= tol && self.model_rel_error <= T::tol(1e-12)
    }
}

/// Splits `2 log ρ_F` into the three log-determinants using exact remainders.
pub fn factorize<T: Real>(
    f: &FData<T>,
    a_scaled: &[DMatrix<T>],
    log_rho_f: T,
    model: CovarianceModel,
) -> Result<Factorization<T>> {
    let (n, d) = (f.n, f.d);
    if a_scaled.len() != n {
        return Err(Error::Argument("one tidal matrix per segment required".into()));
    }
    let delta = f.delta;
    let t = BlockMatrix::<T>::unit_lower_bidiagonal(n, d);
    let g: Vec<DMatrix<T>> = (0..f.nodes()).map(|k| &f.at_node(k).dense - &t.dense).collect();
    let m = cov(&g, &g, &f.weights, delta);
    let inv = T::one() / delta;
    let g_mean = g.iter().zip(&f.weights).fold(DMatrix::zeros(n * d, n * d), |acc, (x, &w)| acc + x * (w * inv));

    let mut v = BlockMatrix::zeros(n, d);
    let mut v_inv = BlockMatrix::zeros(n, d);
    let mut log_det_v2 = T::zero();
    for i in 0..n {
        let vi = &f.s_end[i] * inv;
        let (ld, sign) = linalg::log_abs_det(&vi)?;
        if sign <= T::zero() {
            return Err(Error::Numeric(format!("S_{}(Δ) has non-positive determinant", i + 1)));
        }
        log_det_v2 += ld + ld;
        v_inv.set_block(i, i, &linalg::inverse(&vi)?);
        v.set_block(i, i, &vi);
    }
    let eye = DMatrix::<T>::identity(n * d, n * d);
    let td = &t.dense * (&v.dense - &eye);
    let mean_residual = linalg::max_abs_diff(&g_mean, &td);

    let c = model_covariance(a_scaled, model);
    let k = leading_order_covariance(a_scaled, delta, f.nodes().max(4));
    let c_scale = linalg::max_abs(&c.dense);
    let model_rel_error = if c_scale > T::zero() {
        linalg::max_abs_diff(&c.dense, &k.dense) / c_scale
    } else {
        linalg::max_abs(&k.dense)
    };

    let s = BlockMatrix::<T>::lower_ones(n, d).dense;
    let u = s.transpose() * &c.dense * &s;
    let iu = &eye + &u;
    let log_det_iu = linalg::log_det_spd(&iu)
        .map_err(|_| Error::Numeric("I + U is not positive definite".into()))?;
    let min_eig_iu = linalg::sym_eigenvalues(&iu)[0];
    let e = v_inv.dense.transpose() * &m * &v_inv.dense - &c.dense;
    let x = linalg::solve(&iu, &(s.transpose() * &e * &s))?;
    let (log_det_ix, sign) = linalg::log_abs_det(&(&eye + &x))?;
    if sign <= T::zero() {
        return Err(Error::Numeric("I + X has non-positive determinant".into()));
    }

    let lhs = log_rho_f + log_rho_f;
    let rhs = log_det_v2 + log_det_iu + log_det_ix;
    let scale = lhs.abs().max(log_det_v2.abs()).max(log_det_iu.abs()).max(log_det_ix.abs());
    let identity_rel_error = if scale > T::zero() { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() };

    let remainder_norm = linalg::spectral_norm(&(&m - &c.dense));
    let a_max = a_scaled.iter().fold(T::zero(), |acc, x| acc.max(linalg::spectral_norm(x)));
    let remainder_ratio = if a_max > T::zero() {
        remainder_norm / (a_max * a_max * a_max.sqrt())
    } else {
        T::zero()
    };
    Ok(Factorization {
        log_det_v2,
        log_det_iu,
        log_det_ix,
        identity_rel_error,
        mean_residual,
        model_rel_error,
        remainder_norm,
        remainder_ratio,
        min_eig_iu,
    })
}
