use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::density::{build_q, rho_via_q, segment_pairs};
use crate::development::{coarsen, develop, sample_brownian, segment_guard, DrivingPath, Integrator};
use crate::error::Result;
use crate::quadrature::mean_and_se;
use crate::wiener::limit_density;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub lhs: f64,
    pub lhs_se: f64,
    /// Paired `LHS_n − RHS` over the samples that passed the guard.
    pub diff: f64,
    pub diff_se: f64,
    pub guard_failures: usize,
    pub guard_fail_frac: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub rhs: f64,
    pub rhs_se: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// `|diff| ≤ k·SE` at the largest `n`.
    pub fn final_within(&self, k: f64) -> bool {
        self.rows.last().is_some_and(|r| r.diff.abs() <= k * r.diff_se)
    }

    /// `|d_{j+1}| ≤ |d_j| + max(se_j, se_{j+1})` along increasing `n`.
    pub fn monotone_within_se(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].diff.abs() <= w[0].diff.abs() + w[0].diff_se.max(w[1].diff_se))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lhs,lhs_se,diff,diff_se,guard_fail_frac\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{:e},{:e},{:e}", r.n, r.lhs, r.lhs_se, r.diff, r.diff_se, r.guard_fail_frac);
        }
        out
    }

    /// Line chart of `|diff|` with `±SE` bars against `log₂ n`.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (480.0, 320.0, 48.0);
        let xs: Vec<f64> = self.rows.iter().map(|r| (r.n as f64).log2()).collect();
        let top = self
            .rows
            .iter()
            .map(|r| r.diff.abs() + r.diff_se)
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(0.0, f64::max));
        let span = (x1 - x0).max(1.0);
        let px = |x: f64| pad + (x - x0) / span * (w - 2.0 * pad);
        let py = |y: f64| h - pad - y / top * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<line x1="{pad}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{b}" stroke="black"/>"#,
            b = h - pad,
            r = w - pad
        );
        let pts: Vec<String> = self
            .rows
            .iter()
            .zip(&xs)
            .map(|(r, &x)| format!("{:.2},{:.2}", px(x), py(r.diff.abs())))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for (r, &x) in self.rows.iter().zip(&xs) {
            let lo = (r.diff.abs() - r.diff_se).max(0.0);
            let hi = r.diff.abs() + r.diff_se;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{a:.2}" x2="{x:.2}" y2="{b:.2}" stroke="gray"/><text x="{x:.2}" y="{t:.2}" font-size="11" text-anchor="middle">{n}</text>"#,
                x = px(x),
                a = py(lo),
                b = py(hi),
                t = h - pad + 16.0,
                n = r.n
            );
        }
        let _ = writeln!(s, r#"<text x="{pad}" y="{y}" font-size="11">|LHS_n − RHS| (max {top:.3e})</text>"#, y = pad - 12.0);
        s.push_str("</svg>\n");
        s
    }

    /// Writes `report.json`, `convergence.csv` and `convergence.svg` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        std::fs::write(dir.join("convergence.csv"), self.to_csv())?;
        std::fs::write(dir.join("convergence.svg"), self.to_svg())?;
        Ok(())
    }
}

struct SampleTerms {
    rhs: f64,
    lhs: Vec<Option<f64>>,
}

/// `f(φ(b_n))·ρ_n` on one coarsening, or `None` when the guard fails.
pub fn lhs_term(cfg: &ExperimentConfig, coarse: &DrivingPath<f64>) -> Result<Option<f64>> {
    let m = &cfg.manifold;
    if !segment_guard(coarse, m.curvature_bound()).ok() {
        return Ok(None);
    }
    let sigma = develop(m, coarse, 1, Integrator::Exact)?;
    let f = cfg.test_function.eval(m, sigma.endpoint());
    let log_rho = if m.is_flat() {
        0.0
    } else {
        let (pairs, _) = segment_pairs(m, coarse, &cfg.density)?;
        rho_via_q(&build_q(&pairs)?)?
    };
    Ok(Some(f * log_rho.exp()))
}

/// `f(φ̃)·e^{−∫Scal/6}·e^{γ/2}` on the fine development.
pub fn rhs_term(cfg: &ExperimentConfig, fine: &DrivingPath<f64>) -> Result<f64> {
    let m = &cfg.manifold;
    let sigma = develop(m, fine, cfg.substeps, cfg.integrator)?;
    let f = cfg.test_function.eval(m, sigma.endpoint());
    let limit = limit_density(m, &sigma, cfg.wiener_nodes)?;
    Ok(f * limit.log_density.exp())
}

fn sample_terms(cfg: &ExperimentConfig, index: usize) -> Result<SampleTerms> {
    let fine = sample_brownian::<f64>(cfg.seed, index as u64, cfg.n_fine, cfg.manifold.dim)?;
    let rhs = rhs_term(cfg, &fine)?;
    let lhs = cfg
        .n_list
        .iter()
        .map(|&n| lhs_term(cfg, &coarsen(&fine, n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleTerms { rhs, lhs })
}

/// Coupled Monte Carlo of `E[f(φ(b_n))ρ_n]` against its limiting expectation.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.check_convergence_hypothesis()?;
    let terms = (0..cfg.samples)
        .into_par_iter()
        .map(|j| sample_terms(cfg, j))
        .collect::<Result<Vec<_>>>()?;
    let rhs_all: Vec<f64> = terms.iter().map(|t| t.rhs).collect();
    let (rhs, rhs_se) = mean_and_se(&rhs_all);
    let rows = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut lhs = Vec::with_capacity(terms.len());
            let mut diff = Vec::with_capacity(terms.len());
            for t in &terms {
                if let Some(v) = t.lhs[k] {
                    lhs.push(v);
                    diff.push(v - t.rhs);
                }
            }
            let failures = terms.len() - lhs.len();
            let (lm, ls) = mean_and_se(&lhs);
            let (dm, ds) = mean_and_se(&diff);
            ConvergenceRow {
                n,
                lhs: lm,
                lhs_se: ls,
                diff: dm,
                diff_se: ds,
                guard_failures: failures,
                guard_fail_frac: failures as f64 / terms.len() as f64,
            }
        })
        .collect();
    Ok(ConvergenceReport { config: cfg.clone(), rhs, rhs_se, rows })
}
