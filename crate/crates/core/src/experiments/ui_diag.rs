use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::density::{build_q, rho_via_q, segment_pairs, ui_bound};
use crate::development::{coarsen, sample_brownian, segment_guard};
use crate::error::{Error, Result};
use crate::jacobi::Envelope;
use crate::quadrature::mean_and_se;

#[derive(Debug, Clone, Serialize)]
pub struct UiRow {
    pub n: usize,
    /// `E[ρ_n^p]` over guard-passing samples.
    pub moment: f64,
    pub moment_se: f64,
    pub guard_failures: usize,
    /// Samples where `log det(nQ)` exceeded one of the bounds.
    pub bound_violations: usize,
    /// Largest `log det(nQ) − bound` seen, negative when every sample is below.
    pub worst_bound_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UiReport {
    pub p: f64,
    pub curvature: f64,
    pub convergence_threshold: f64,
    pub integrability_threshold: f64,
    pub rows: Vec<UiRow>,
    /// Largest relative change of `E[ρ_n^p]` between consecutive entries among the top three `n`.
    pub plateau: f64,
}

impl UiReport {
    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| r.moment.is_finite() && r.moment_se.is_finite())
    }

    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.bound_violations).sum()
    }
}

struct UiSample {
    rho_p: Option<f64>,
    gap: Option<f64>,
    holds: Option<bool>,
}

fn ui_sample(cfg: &ExperimentConfig, index: usize, n: usize, envelope: &Envelope) -> Result<UiSample> {
    let m = &cfg.manifold;
    let fine = sample_brownian::<f64>(cfg.seed, index as u64, cfg.n_fine, m.dim)?;
    let coarse = coarsen(&fine, n)?;
    let k = m.curvature_bound();
    if !segment_guard(&coarse, k).ok() {
        return Ok(UiSample { rho_p: None, gap: None, holds: None });
    }
    let (pairs, _) = segment_pairs(m, &coarse, &cfg.density)?;
    let q = build_q(&pairs)?;
    let log_rho = rho_via_q(&q)?;
    let norms: Vec<f64> = coarse.increments.iter().map(|v| v.norm()).collect();
    let b = ui_bound(&pairs, &q, &norms, k, envelope)?;
    let tightest = b.log_bound_blocks.min(b.log_bound_ab).min(b.log_bound_psi).min(b.log_bound_envelope);
    Ok(UiSample { rho_p: Some((cfg.p * log_rho).exp()), gap: Some(b.log_det_nq - tightest), holds: Some(b.holds) })
}

/// Monte Carlo estimates of `E[ρ_n^p]` and the per-sample check of the determinant bound chain.
pub fn run_ui_diagnostic(cfg: &ExperimentConfig) -> Result<UiReport> {
    if cfg.p <= 1.0 {
        return Err(Error::Config(format!("p must exceed 1, got {}", cfg.p)));
    }
    let envelope = Envelope::default();
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let samples = (0..cfg.samples)
            .into_par_iter()
            .map(|j| ui_sample(cfg, j, n, &envelope))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = samples.iter().filter_map(|s| s.rho_p).collect();
        let (moment, moment_se) = mean_and_se(&values);
        let gaps: Vec<f64> = samples.iter().filter_map(|s| s.gap).collect();
        rows.push(UiRow {
            n,
            moment,
            moment_se,
            guard_failures: samples.len() - values.len(),
            bound_violations: samples.iter().filter(|s| s.holds == Some(false)).count(),
            worst_bound_gap: gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let top: Vec<f64> = rows.iter().rev().take(3).rev().map(|r| r.moment).collect();
    let plateau = top.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max);
    Ok(UiReport {
        p: cfg.p,
        curvature: cfg.manifold.curvature_bound(),
        convergence_threshold: cfg.convergence_threshold(),
        integrability_threshold: cfg.integrability_threshold(),
        rows,
        plateau,
    })
}
