//! Limit-side functional: `∫Scal` along a development and `det(I + K/12)` for the kernel `min(s,t)Γ(u(t))`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::density::BlockMatrix;
use crate::development::DevelopedPath;
use crate::error::{Error, Result};
use crate::geometry::{curvature_in_frame, gamma_operator, scalar_curvature, ManifoldSpec};
use crate::linalg;
use crate::scalar::Real;

/// Coefficient in front of the kernel in the limiting determinant.
pub const KERNEL_SCALE: f64 = 1.0 / 12.0;

/// Number of trapezoid levels combined by Richardson extrapolation.
const LEVELS: usize = 4;

/// Uniform nodes `t_j = j/N`, `j = 0..=N`, with trapezoid weights and `Γ(u(t_j))`.
#[derive(Debug, Clone)]
pub struct KernelDiscretization<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub gamma_samples: Vec<DMatrix<T>>,
}

fn trapezoid<T: Real>(intervals: usize) -> (Vec<T>, Vec<T>) {
    let h = T::one() / T::count(intervals);
    let nodes = (0..=intervals).map(|j| T::count(j) * h).collect();
    let weights = (0..=intervals)
        .map(|j| if j == 0 || j == intervals { h * T::lit(0.5) } else { h })
        .collect();
    (nodes, weights)
}

impl<T: Real> KernelDiscretization<T> {
    /// `intervals` must be a positive multiple of 8 so that three coarser levels exist.
    pub fn from_fn<F: FnMut(T) -> DMatrix<T>>(intervals: usize, mut gamma: F) -> Result<Self> {
        if intervals == 0 || intervals % (1 << (LEVELS - 1)) != 0 {
            return Err(Error::Argument(format!(
                "node intervals must be a positive multiple of {}, got {intervals}",
                1 << (LEVELS - 1)
            )));
        }
        let (nodes, weights) = trapezoid::<T>(intervals);
        let gamma_samples = nodes.iter().map(|&t| gamma(t)).collect();
        let k = KernelDiscretization { nodes, weights, gamma_samples };
        k.validate()?;
        Ok(k)
    }

    pub fn constant(intervals: usize, gamma: &DMatrix<T>) -> Result<Self> {
        Self::from_fn(intervals, |_| gamma.clone())
    }

    /// Samples `Γ` at the frames of a developed path, held constant between substeps.
    pub fn from_path(m: &ManifoldSpec<T>, path: &DevelopedPath<T>, intervals: usize) -> Result<Self> {
        let mut err = None;
        let k = Self::from_fn(intervals, |t| match curvature_in_frame(m, path.frame_at(t)) {
            Ok(c) => gamma_operator(&c),
            Err(e) => {
                err.get_or_insert(e);
                DMatrix::zeros(m.dim, m.dim)
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(k),
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma_samples[0].nrows()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    fn validate(&self) -> Result<()> {
        let total = self.weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Numeric("quadrature weights do not sum to one".into()));
        }
        for g in &self.gamma_samples {
            if linalg::max_abs_diff(g, &g.transpose()) > T::tol(1e-8) {
                return Err(Error::Numeric("Γ sample is not symmetric".into()));
            }
        }
        Ok(())
    }

    /// Every `2^level`-th node with the matching coarser weights.
    fn level(&self, level: usize) -> (Vec<T>, Vec<T>, Vec<&DMatrix<T>>) {
        let stride = 1 << level;
        let (nodes, weights) = trapezoid::<T>(self.intervals() / stride);
        let gammas = (0..nodes.len()).map(|j| &self.gamma_samples[j * stride]).collect();
        (nodes, weights, gammas)
    }

    /// `sup_j ‖Γ(t_j)‖`.
    pub fn gamma_sup(&self) -> T {
        self.gamma_samples.iter().fold(T::zero(), |a, g| a.max(linalg::spectral_norm(g)))
    }

    /// Nyström matrix `scale·[min(t_j,t_l) Γ(t_l) w_l]` at a given level.
    fn nystrom(&self, level: usize, scale: T) -> DMatrix<T> {
        let (nodes, weights, gammas) = self.level(level);
        let d = self.dim();
        let m = nodes.len();
        let mut out = DMatrix::zeros(m * d, m * d);
        for (l, (&tl, &wl)) in nodes.iter().zip(&weights).enumerate() {
            let col = gammas[l] * (wl * scale);
            for (j, &tj) in nodes.iter().enumerate() {
                out.view_mut((j * d, l * d), (d, d)).copy_from(&(&col * tj.min(tl)));
            }
        }
        out
    }

    /// `scale · Σ_j w_j t_j tr Γ(t_j)`.
    pub fn trace_by_quadrature(&self, scale: T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.gamma_samples)
            .fold(T::zero(), |a, ((&t, &w), g)| a + w * t * linalg::trace(g))
            * scale
    }

    /// Trace of the finest Nyström matrix.
    pub fn nystrom_trace(&self, scale: T) -> T {
        linalg::trace(&self.nystrom(0, scale))
    }

    /// Conjugates every sample by a fixed orthogonal `r`.
    pub fn rotated(&self, r: &DMatrix<T>) -> Self {
        KernelDiscretization {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            gamma_samples: self.gamma_samples.iter().map(|g| r.transpose() * g * r).collect(),
        }
    }
}

/// Richardson table for an `h²`-expansion, finest value first in `values`.
fn richardson<T: Real>(values: &[T]) -> T {
    let mut row = values.to_vec();
    let mut factor = T::lit(4.0);
    while row.len() > 1 {
        row = row
            .windows(2)
            .map(|w| (w[0] * factor - w[1]) / (factor - T::one()))
            .collect();
        factor *= T::lit(4.0);
    }
    row[0]
}

#[derive(Debug, Clone, Serialize)]
pub struct FredholmDiagnostics {
    /// Trapezoid values, finest first.
    pub raw: Vec<f64>,
    /// Change in the extrapolated value when the finest level is dropped.
    pub doubling_change: f64,
    /// Largest `|Im λ|` over the finest Nyström matrix, when requested.
    pub max_imaginary: Option<f64>,
    /// `false` when the determinant came out non-positive.
    pub positive: bool,
    /// Set when `doubling_change` exceeds `1e-6`.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FredholmResult {
    pub log_det: f64,
    pub diagnostics: FredholmDiagnostics,
}

/// `log det(I + scale·K)` by trapezoid Nyström with extrapolation over four node levels.
pub fn fredholm_nystrom<T: Real>(k: &KernelDiscretization<T>, scale: T) -> Result<FredholmResult> {
    fredholm_nystrom_with(k, scale, false)
}

/// As [`fredholm_nystrom`], optionally reporting the imaginary parts of the Nyström spectrum.
pub fn fredholm_nystrom_with<T: Real>(k: &KernelDiscretization<T>, scale: T, spectrum: bool) -> Result<FredholmResult> {
    let mut raw = Vec::with_capacity(LEVELS);
    let mut positive = true;
    let mut max_imaginary = None;
    for level in 0..LEVELS {
        let a = k.nystrom(level, scale);
        let m = &DMatrix::identity(a.nrows(), a.ncols()) + &a;
        if level == 0 && spectrum {
            let im = m.complex_eigenvalues().iter().fold(0.0f64, |acc, z| acc.max(z.im.as_f64().abs()));
            max_imaginary = Some(im);
        }
        let (ld, sign) = linalg::log_abs_det(&m)?;
        positive &= sign > T::zero();
        raw.push(ld);
    }
    let value = richardson(&raw);
    let shift = (value - richardson(&raw[1..])).abs().as_f64();
    let warning = (shift > 1e-6).then(|| format!("node-doubling change {shift:.3e}"));
    Ok(FredholmResult {
        log_det: value.as_f64(),
        diagnostics: FredholmDiagnostics {
            raw: raw.iter().map(|x| x.as_f64()).collect(),
            doubling_change: shift,
            max_imaginary,
            positive,
            warning,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesResult {
    /// `γ_1, …, γ_kmax`.
    pub gamma_k: Vec<f64>,
    /// `Σ (−1)^{k+1} γ_k / k`.
    pub gamma: f64,
    /// `dκ^{k+1} / ((k+1)(1−κ))` at `k = kmax`.
    pub remainder_bound: f64,
    /// `scale · sup‖Γ‖`.
    pub kappa: f64,
}

/// Trace series for `log det(I + scale·K)`; each `tr K^k` is extrapolated like the Nyström value.
pub fn fredholm_series<T: Real>(k: &KernelDiscretization<T>, scale: T, k_max: usize) -> Result<SeriesResult> {
    let kappa = (scale * k.gamma_sup()).as_f64();
    if kappa >= 1.0 {
        return Err(Error::Argument(format!("series needs κ < 1, got {kappa:.4}")));
    }
    if k_max == 0 {
        return Err(Error::Argument("k_max must be at least 1".into()));
    }
    let mut traces = vec![Vec::with_capacity(LEVELS); k_max];
    for level in 0..LEVELS {
        let a = k.nystrom(level, scale);
        let mut p = a.clone();
        for tr in traces.iter_mut() {
            tr.push(linalg::trace(&p));
            p = &p * &a;
        }
    }
    let gamma_k: Vec<f64> = traces.iter().map(|t| richardson(t).as_f64()).collect();
    let gamma = gamma_k
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * g / (i + 1) as f64
        })
        .sum();
    let d = k.dim() as f64;
    let remainder_bound = d * kappa.powi(k_max as i32 + 1) / ((k_max + 1) as f64 * (1.0 - kappa));
    Ok(SeriesResult { gamma_k, gamma, remainder_bound, kappa })
}

/// `Λ^n` assembled from `Γ` at `s_0, …, s_n`.
pub fn lambda_matrix<T: Real>(gamma_at_nodes: &[DMatrix<T>]) -> Result<BlockMatrix<T>> {
    if gamma_at_nodes.len() < 2 {
        return Err(Error::Argument("need Γ at s_0 … s_n with n ≥ 1".into()));
    }
    let n = gamma_at_nodes.len() - 1;
    let d = gamma_at_nodes[0].nrows();
    let inv_n2 = T::one() / T::count(n * n);
    let c_off = T::lit(7.0 / 360.0) * inv_n2;
    let c_diag = T::lit(1.0 / 45.0) * inv_n2;
    Ok(BlockMatrix::from_blocks(n, d, |li, mi| {
        let (l, m) = (li + 1, mi + 1);
        let prev = &gamma_at_nodes[m - 1];
        let mut b = prev * (c_off * T::count(l.min(m - 1)) + c_diag * T::count(l.min(m)));
        if m < n {
            let cur = &gamma_at_nodes[m];
            b += cur * (c_diag * T::count(l.min(m)) + c_off * T::count(l.min(m + 1)));
        }
        Some(b)
    }))
}

/// `γ_k^n = Tr((Λ^n)^k)`.
pub fn gamma_k_discrete<T: Real>(gamma_at_nodes: &[DMatrix<T>], k: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let lambda = lambda_matrix(gamma_at_nodes)?.dense;
    let mut p = lambda.clone();
    for _ in 1..k {
        p = &p * &lambda;
    }
    Ok(linalg::trace(&p))
}

/// `Γ(u(s_i))` at the partition nodes of a developed path.
pub fn gamma_at_nodes<T: Real>(m: &ManifoldSpec<T>, path: &DevelopedPath<T>) -> Result<Vec<DMatrix<T>>> {
    path.nodes
        .iter()
        .map(|f| curvature_in_frame(m, f).map(|c| gamma_operator(&c)))
        .collect()
}

/// Smallest eigenvalue of `[min(x_i, x_j)]`.
pub fn min_kernel_psd_check<T: Real>(points: &[T]) -> T {
    if points.is_empty() {
        return T::zero();
    }
    let g = DMatrix::from_fn(points.len(), points.len(), |i, j| points[i].min(points[j]));
    linalg::sym_eigenvalues(&g)[0]
}

/// Left Riemann sum of `Scal` over the substep frames.
pub fn scal_integral<T: Real>(m: &ManifoldSpec<T>, path: &DevelopedPath<T>) -> Result<T> {
    let steps = path.samples.len() - 1;
    if steps == 0 {
        return Err(Error::Argument("path needs at least two samples".into()));
    }
    let mut acc = T::zero();
    for f in &path.samples[..steps] {
        acc += scalar_curvature(&curvature_in_frame(m, f)?);
    }
    Ok(acc / T::count(steps))
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitDensityResult {
    pub scal_integral: f64,
    /// `γ = log det(I + K/12)`.
    pub log_fredholm: f64,
    /// `−scal_integral/6 + γ/2`.
    pub log_density: f64,
}

/// Limiting density along a fine development.
pub fn limit_density<T: Real>(m: &ManifoldSpec<T>, path: &DevelopedPath<T>, intervals: usize) -> Result<LimitDensityResult> {
    let scal = scal_integral(m, path)?.as_f64();
    let log_fredholm = if m.is_flat() {
        0.0
    } else {
        let k = KernelDiscretization::from_path(m, path, intervals)?;
        fredholm_nystrom(&k, T::lit(KERNEL_SCALE))?.log_det
    };
    Ok(LimitDensityResult { scal_integral: scal, log_fredholm, log_density: -scal / 6.0 + log_fredholm / 2.0 })
}
