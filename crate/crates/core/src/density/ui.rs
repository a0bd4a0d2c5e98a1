use nalgebra::DMatrix;
use serde::Serialize;

use super::block::BlockMatrix;
use crate::error::Result;
use crate::jacobi::{psi, Envelope, JacobiPair};
use crate::linalg;
use crate::scalar::Real;

/// Chain of upper bounds for `det(nQ^n)` on one driver.
#[derive(Debug, Clone, Serialize)]
pub struct UiBound {
    /// `n∫‖S_m′ᵀS_m′ − I‖`.
    pub a_m: Vec<f64>,
    /// `Σ_{j>m} ‖S_m(Δ)‖² Π‖C_k(Δ)‖² ‖n∫C_j′ᵀC_j′‖`.
    pub b_m: Vec<f64>,
    /// `‖nQ_mm − I‖`.
    pub block_deviation: Vec<f64>,
    pub log_det_nq: f64,
    /// `d Σ‖nQ_mm − I‖` (α = 1).
    pub log_bound_blocks: f64,
    /// `d Σ(A_m + B_m)` (α = 1).
    pub log_bound_ab: f64,
    /// `nd log α(ω) + d Σ[K|Δ_m|² + (1/3 + n)K²u(K|Δ_m|²)|Δ_m|⁴]`.
    pub log_bound_envelope: f64,
    /// Same chain with the intermediate ψ bounds on `A_m`, `B_m`.
    pub log_bound_psi: f64,
    pub log_alpha: f64,
    /// `‖nQ_mm − I‖ ≤ A_m + B_m` for every `m`.
    pub blocks_within_ab: bool,
    /// `log det(nQ)` is below every bound in the chain.
    pub holds: bool,
}

/// Evaluates the uniform-integrability chain for `det(nQ^n)`.
///
/// `increment_norms[m] = ‖Δ_mω‖`, `k` is the sectional bound of the manifold.
pub fn ui_bound<T: Real>(
    pairs: &[JacobiPair<T>],
    q: &BlockMatrix<T>,
    increment_norms: &[f64],
    k: f64,
    envelope: &Envelope,
) -> Result<UiBound> {
    let n = pairs.len();
    let d = pairs[0].dim();
    let nf = n as f64;
    let nt = T::count(n);
    let eye = DMatrix::<T>::identity(d, d);
    let nq = &q.dense * nt;
    let log_det_nq = linalg::log_det_spd(&nq)?.as_f64();

    let a_m: Vec<f64> = pairs
        .iter()
        .map(|p| {
            let mut acc = T::zero();
            for (smp, &w) in p.at_nodes.iter().zip(&p.weights) {
                acc += linalg::spectral_norm(&(smp.ds.transpose() * &smp.ds - &eye)) * w;
            }
            (acc * nt).as_f64()
        })
        .collect();
    let cc: Vec<f64> = pairs
        .iter()
        .map(|p| linalg::spectral_norm(&(p.integrate_product(|x| &x.dc, |x| &x.dc) * nt)).as_f64())
        .collect();
    let c_norm2: Vec<f64> = pairs.iter().map(|p| linalg::spectral_norm(&p.end.c).as_f64().powi(2)).collect();
    let s_norm2: Vec<f64> = pairs.iter().map(|p| linalg::spectral_norm(&p.end.s).as_f64().powi(2)).collect();
    let b_m: Vec<f64> = (0..n)
        .map(|m| {
            let mut acc = 0.0;
            let mut prod = s_norm2[m];
            for j in m + 1..n {
                acc += prod * cc[j];
                prod *= c_norm2[j];
            }
            acc
        })
        .collect();
    let block_deviation: Vec<f64> = (0..n)
        .map(|m| linalg::spectral_norm(&(&nq.view((m * d, m * d), (d, d)).into_owned() - &eye)).as_f64())
        .collect();
    let df = d as f64;
    let log_bound_blocks = df * block_deviation.iter().sum::<f64>();
    let log_bound_ab = df * a_m.iter().zip(&b_m).map(|(a, b)| a + b).sum::<f64>();
    let blocks_within_ab = block_deviation
        .iter()
        .zip(a_m.iter().zip(&b_m))
        .all(|(dev, (a, b))| *dev <= a + b + 1e-12 * (1.0 + a + b));

    let tau2: Vec<f64> = increment_norms.iter().map(|x| k * x * x).collect();
    let log_alpha: f64 = tau2.iter().map(|&t| 2.0 * t * envelope.g(t)).sum();
    let alpha = log_alpha.exp();
    let psi2: Vec<f64> = tau2.iter().map(|&t| psi(t.sqrt()).powi(2)).collect();
    let mut psi_sum = 0.0;
    for m in 0..n {
        let t = tau2[m];
        let am = psi(t.sqrt()) * t + psi2[m] * t * t / 3.0;
        let mut bm = 0.0;
        let mut prod = psi2[m];
        for j in m + 1..n {
            prod *= psi2[j];
            bm += prod * tau2[j] * tau2[j];
        }
        psi_sum += am + bm;
    }
    let log_bound_psi = nf * df * log_alpha + df * psi_sum / alpha;
    let theta: f64 = tau2.iter().map(|&t| t + (1.0 / 3.0 + nf) * envelope.u(t) * t * t).sum();
    let log_bound_envelope = nf * df * log_alpha + df * theta;
    let slack = 1e-10 * (1.0 + log_det_nq.abs());
    let holds = log_det_nq <= log_bound_blocks + slack
        && log_det_nq <= log_bound_ab + slack
        && log_det_nq <= log_bound_psi + slack
        && log_det_nq <= log_bound_envelope + slack
        && blocks_within_ab;
    Ok(UiBound {
        a_m,
        b_m,
        block_deviation,
        log_det_nq,
        log_bound_blocks,
        log_bound_ab,
        log_bound_envelope,
        log_bound_psi,
        log_alpha,
        blocks_within_ab,
        holds,
    })
}
