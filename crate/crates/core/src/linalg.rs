//! Dense linear-algebra helpers working in the log domain.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `log det` of a symmetric positive definite matrix via Cholesky.
pub fn log_det_spd<T: Real>(m: &DMatrix<T>) -> Result<T> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..m.nrows() {
        acc += l[(i, i)].ln();
    }
    Ok(acc + acc)
}

/// `(log |det m|, sign)` via partially pivoted LU.
pub fn log_abs_det<T: Real>(m: &DMatrix<T>) -> Result<(T, T)> {
    if !m.is_square() {
        return Err(Error::Argument("determinant of a non-square matrix".into()));
    }
    let lu = m.clone().lu();
    let mut sign: T = lu.p().determinant();
    let mut acc = T::zero();
    let u = lu.u();
    for i in 0..m.nrows() {
        let x = u[(i, i)];
        if x == T::zero() || !x.is_finite() {
            return Err(Error::Numeric("singular matrix in log-determinant".into()));
        }
        if x < T::zero() {
            sign = -sign;
        }
        acc += x.abs().ln();
    }
    Ok((acc, sign))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |a, &b| a.max(b))
}

/// Euclidean norm of a vector.
pub fn vnorm<T: Real>(v: &DVector<T>) -> T {
    v.norm()
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let s = symmetric_part(m);
    let mut ev: Vec<T> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn symmetric_part<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
}

pub fn max_abs<T: Real>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// `‖mᵀm − I‖_∞`.
pub fn orthonormality_residual<T: Real>(m: &DMatrix<T>) -> T {
    let g = m.transpose() * m;
    max_abs_diff(&g, &DMatrix::identity(g.nrows(), g.ncols()))
}

/// Polar factor `m (mᵀm)^{-1/2}`: the nearest matrix with orthonormal columns.
pub fn polar_orthonormalize<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let g = m.transpose() * m;
    let eig = SymmetricEigen::new(g);
    let mut inv_sqrt = DMatrix::zeros(m.ncols(), m.ncols());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= T::zero() {
            return Err(Error::Numeric("rank-deficient frame".into()));
        }
        let q = eig.eigenvectors.column(k);
        inv_sqrt += q * q.transpose() * (T::one() / lam.sqrt());
    }
    Ok(m * inv_sqrt)
}

pub fn trace<T: Real>(m: &DMatrix<T>) -> T {
    m.trace()
}

/// Inverse via LU, failing on singular input.
pub fn inverse<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular matrix".into()))
}

/// Solves `a x = b` for a square `a`.
pub fn solve<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numeric("singular linear system".into()))
}

/// 2-norm condition number.
pub fn condition_number<T: Real>(m: &DMatrix<T>) -> T {
    let sv = m.clone().singular_values();
    if sv.is_empty() {
        return T::one();
    }
    let mut lo = sv[0];
    let mut hi = sv[0];
    for &s in sv.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if lo == T::zero() {
        T::lit(f64::INFINITY)
    } else {
        hi / lo
    }
}
