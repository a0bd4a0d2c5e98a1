use nalgebra::DMatrix;

use super::block::BlockMatrix;
use crate::error::{Error, Result};
use crate::jacobi::JacobiPair;
use crate::linalg;
use crate::scalar::Real;

/// Blocks of the lower block-bidiagonal `F^n(s)` at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct FData<T: Real> {
    pub n: usize,
    pub d: usize,
    pub delta: T,
    pub weights: Vec<T>,
    /// `F_i = S_{i+1}(Δ)^{-1} C_{i+1}(Δ) S_i(Δ)`, `n − 1` entries.
    pub chain: Vec<DMatrix<T>>,
    /// `S_i(Δ)`.
    pub s_end: Vec<DMatrix<T>>,
    /// `diag[i][k] = S_i′(s_k)`.
    pub diag: Vec<Vec<DMatrix<T>>>,
    /// `sub[i][k] = V_{i+1}′(s_k)`, the block below `diag[i]`.
    pub sub: Vec<Vec<DMatrix<T>>>,
    /// `max_i ‖V_i(Δ)‖ / ‖S_{i−1}(Δ)‖`, zero in exact arithmetic.
    pub v_end_residual: T,
}

impl<T: Real> FData<T> {
    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    /// Dense `F^n(s_k)`.
    pub fn at_node(&self, k: usize) -> BlockMatrix<T> {
        BlockMatrix::from_blocks(self.n, self.d, |i, j| {
            if i == j {
                Some(self.diag[i][k].clone())
            } else if i == j + 1 {
                Some(self.sub[j][k].clone())
            } else {
                None
            }
        })
    }

    /// `F^n(0)`: identity diagonal and `−F_i` below it.
    pub fn at_zero(&self) -> BlockMatrix<T> {
        BlockMatrix::from_blocks(self.n, self.d, |i, j| {
            if i == j {
                Some(DMatrix::identity(self.d, self.d))
            } else if i == j + 1 {
                Some(-self.chain[j].clone())
            } else {
                None
            }
        })
    }

    /// `⟨FᵀF⟩ = Δ^{-1}∫_0^Δ FᵀF`.
    pub fn mean_gram(&self) -> BlockMatrix<T> {
        let mut g = BlockMatrix::zeros(self.n, self.d);
        let inv = T::one() / self.delta;
        for (k, &w) in self.weights.iter().enumerate() {
            let wk = w * inv;
            for a in 0..self.n {
                let sa = &self.diag[a][k];
                let mut db = sa.transpose() * sa;
                if a + 1 < self.n {
                    let v = &self.sub[a][k];
                    db += v.transpose() * v;
                    let off = v.transpose() * &self.diag[a + 1][k] * wk;
                    g.add_block(a, a + 1, &off);
                    g.add_block(a + 1, a, &off.transpose());
                }
                g.add_block(a, a, &(db * wk));
            }
        }
        g
    }
}

pub fn build_f<T: Real>(pairs: &[JacobiPair<T>]) -> Result<FData<T>> {
    let n = pairs.len();
    if n == 0 {
        return Err(Error::Argument("no segments".into()));
    }
    let d = pairs[0].dim();
    let s_end: Vec<_> = pairs.iter().map(|p| p.end.s.clone()).collect();
    let mut chain = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let rhs = &pairs[i + 1].end.c * &s_end[i];
        chain.push(linalg::solve(&s_end[i + 1], &rhs)?);
    }
    let diag = pairs
        .iter()
        .map(|p| p.at_nodes.iter().map(|x| x.ds.clone()).collect())
        .collect();
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    let mut v_end_residual = T::zero();
    for i in 1..n {
        let p = &pairs[i];
        let prev = &s_end[i - 1];
        let f = &chain[i - 1];
        sub.push(p.at_nodes.iter().map(|x| &x.dc * prev - &x.ds * f).collect());
        let v_end = &p.end.c * prev - &p.end.s * f;
        let r = linalg::spectral_norm(&v_end) / linalg::spectral_norm(prev);
        v_end_residual = v_end_residual.max(r);
    }
    Ok(FData {
        n,
        d,
        delta: pairs[0].delta,
        weights: pairs[0].weights.clone(),
        chain,
        s_end,
        diag,
        sub,
        v_end_residual,
    })
}

/// Result of the second determinant formula.
#[derive(Debug, Clone, Copy)]
pub struct FRho<T> {
    pub log_rho: T,
    /// `log det(Δ·F(0)ᵀF(0))`, the Gram determinant of the piecewise basis.
    pub gram_log_det: T,
    /// `nd · log Δ`.
    pub expected_gram_log_det: T,
}

pub fn rho_via_f<T: Real>(f: &FData<T>) -> Result<FRho<T>> {
    let log_rho = linalg::log_det_spd(&f.mean_gram().dense)? * T::lit(0.5);
    let (ld0, _) = linalg::log_abs_det(&f.at_zero().dense)?;
    let nd = T::count(f.n * f.d);
    let expected = nd * f.delta.ln();
    Ok(FRho { log_rho, gram_log_det: expected + ld0 + ld0, expected_gram_log_det: expected })
}
