use nalgebra::DMatrix;

use super::block::BlockMatrix;
use crate::error::{Error, Result};
use crate::jacobi::JacobiPair;
use crate::linalg;
use crate::scalar::Real;

/// Propagators `V_mj = C_{j−1}(Δ)⋯C_{m+1}(Δ)S_m(Δ)` for `m < j` (0-based), row-major in `m`.
pub fn propagators<T: Real>(pairs: &[JacobiPair<T>]) -> Vec<Vec<DMatrix<T>>> {
    let n = pairs.len();
    (0..n)
        .map(|m| {
            let mut row = Vec::with_capacity(n - m - 1);
            let mut v = pairs[m].end.s.clone();
            for j in m + 1..n {
                row.push(v.clone());
                v = &pairs[j].end.c * v;
            }
            row
        })
        .collect()
}

/// Gram matrix `Q^n` of the derivatives of the propagated Jacobi basis.
pub fn build_q<T: Real>(pairs: &[JacobiPair<T>]) -> Result<BlockMatrix<T>> {
    let n = pairs.len();
    if n == 0 {
        return Err(Error::Argument("no segments".into()));
    }
    let d = pairs[0].dim();
    let ss: Vec<_> = pairs.iter().map(|p| p.integrate_product(|x| &x.ds, |x| &x.ds)).collect();
    let cs: Vec<_> = pairs.iter().map(|p| p.integrate_product(|x| &x.dc, |x| &x.ds)).collect();
    let cc: Vec<_> = pairs.iter().map(|p| p.integrate_product(|x| &x.dc, |x| &x.dc)).collect();
    let v = propagators(pairs);
    let vm = |m: usize, j: usize| &v[m][j - m - 1];
    let mut q = BlockMatrix::zeros(n, d);
    for m in 0..n {
        let mut diag = ss[m].clone();
        for j in m + 1..n {
            diag += vm(m, j).transpose() * &cc[j] * vm(m, j);
        }
        q.set_block(m, m, &diag);
        for k in m + 1..n {
            let mut b = vm(m, k).transpose() * &cs[k];
            for j in k + 1..n {
                b += vm(m, j).transpose() * &cc[j] * vm(k, j);
            }
            q.set_block(k, m, &b.transpose());
            q.set_block(m, k, &b);
        }
    }
    Ok(q)
}

/// `log ρ_n = ½ log det(nQ^n)`.
pub fn rho_via_q<T: Real>(q: &BlockMatrix<T>) -> Result<T> {
    let scaled = &q.dense * T::count(q.n);
    Ok(linalg::log_det_spd(&scaled)? * T::lit(0.5))
}
