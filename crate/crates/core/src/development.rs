//! Piecewise-linear driving paths and their development onto the manifold.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FramePoint, ManifoldKind, ManifoldSpec};
use crate::linalg;
use crate::scalar::Real;

/// Equal partition of `[0, 1]` into `n` segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionGrid {
    pub n: usize,
}

impl PartitionGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("partition needs at least one segment".into()));
        }
        Ok(PartitionGrid { n })
    }

    pub fn delta<T: Real>(&self) -> T {
        T::one() / T::count(self.n)
    }

    pub fn node<T: Real>(&self, i: usize) -> T {
        T::count(i) / T::count(self.n)
    }
}

/// Piecewise-linear path in `R^d` starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath<T: Real> {
    pub grid: PartitionGrid,
    pub increments: Vec<DVector<T>>,
}

impl<T: Real> DrivingPath<T> {
    pub fn new(increments: Vec<DVector<T>>) -> Result<Self> {
        let grid = PartitionGrid::new(increments.len())?;
        let d = increments[0].len();
        if d == 0 || increments.iter().any(|v| v.len() != d) {
            return Err(Error::Argument("increments must share a positive dimension".into()));
        }
        Ok(DrivingPath { grid, increments })
    }

    pub fn dim(&self) -> usize {
        self.increments[0].len()
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Constant velocity `ω′ = nΔ_iω` on segment `i` (0-based).
    pub fn velocity(&self, i: usize) -> DVector<T> {
        &self.increments[i] * T::count(self.grid.n)
    }

    /// `ω(s_0), …, ω(s_n)`.
    pub fn nodes(&self) -> Vec<DVector<T>> {
        let mut out = Vec::with_capacity(self.n() + 1);
        let mut acc = DVector::zeros(self.dim());
        out.push(acc.clone());
        for inc in &self.increments {
            acc += inc;
            out.push(acc.clone());
        }
        out
    }

    /// `ω(s)` by linear interpolation.
    pub fn eval(&self, s: T) -> DVector<T> {
        let n = self.n();
        let scaled = (s * T::count(n)).max(T::zero());
        let mut i = scaled.floor().as_f64() as usize;
        if i >= n {
            i = n - 1;
        }
        let mut acc = DVector::zeros(self.dim());
        for inc in &self.increments[..i] {
            acc += inc;
        }
        acc + &self.increments[i] * (scaled - T::count(i))
    }

    /// `E(ω) = ½∫|ω′|²`.
    pub fn energy(&self) -> T {
        let n = T::count(self.n());
        self.increments.iter().fold(T::zero(), |a, v| a + v.norm_squared()) * n * T::lit(0.5)
    }

    /// Applies an orthogonal `d × d` map to every increment.
    pub fn rotated(&self, r: &DMatrix<T>) -> Self {
        DrivingPath { grid: self.grid, increments: self.increments.iter().map(|v| r * v).collect() }
    }
}

/// Counter-based Gaussian stream keyed by `(seed, sample, segment)`.
pub fn segment_rng(seed: u64, sample_index: u64, segment: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng.set_word_pos((segment as u128) << 24);
    rng
}

/// Fine Brownian driver with `N(0, I/n_fine)` increments.
pub fn sample_brownian<T: Real>(seed: u64, sample_index: u64, n_fine: usize, dim: usize) -> Result<DrivingPath<T>> {
    if n_fine == 0 || dim == 0 {
        return Err(Error::Argument("n_fine and dim must be positive".into()));
    }
    let sd = (1.0 / n_fine as f64).sqrt();
    let increments = (0..n_fine)
        .map(|seg| {
            let mut rng = segment_rng(seed, sample_index, seg as u64);
            DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::lit(z * sd)
            })
        })
        .collect();
    DrivingPath::new(increments)
}

/// Piecewise-linear interpolation `b_n` of `ω` at the nodes `i/n`.
pub fn coarsen<T: Real>(omega: &DrivingPath<T>, n: usize) -> Result<DrivingPath<T>> {
    let fine = omega.n();
    if n == 0 || fine % n != 0 {
        return Err(Error::Argument(format!("{n} does not divide {fine}")));
    }
    let block = fine / n;
    let increments = omega
        .increments
        .chunks(block)
        .map(|c| c.iter().fold(DVector::zeros(omega.dim()), |a, v| a + v))
        .collect();
    DrivingPath::new(increments)
}

/// Outcome of the segment-size guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuardResult {
    pub epsilon: f64,
    /// First segment (0-based) with `‖Δ_iω‖ ≥ ε`.
    pub violation: Option<usize>,
}

impl GuardResult {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Root of `K x² cosh(√K x) = 1`, capped at 1.
pub fn guard_epsilon(k: f64) -> f64 {
    if k <= 0.0 {
        return 1.0;
    }
    let f = |x: f64| k * x * x * (k.sqrt() * x).cosh() - 1.0;
    if f(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Flat space (`K = 0`) never violates: `S_i(Δ) = ΔI` is always invertible.
pub fn segment_guard<T: Real>(omega: &DrivingPath<T>, k: f64) -> GuardResult {
    let epsilon = guard_epsilon(k);
    if k <= 0.0 {
        return GuardResult { epsilon, violation: None };
    }
    let violation = omega.increments.iter().position(|v| v.norm().as_f64() >= epsilon);
    GuardResult { epsilon, violation }
}

/// How each segment is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    /// Closed-form geodesic and parallel transport.
    Exact,
    /// Classical fourth-order steps with projection after every substep.
    Rk4,
}

/// Points and parallel frames along a developed path.
#[derive(Debug, Clone)]
pub struct DevelopedPath<T: Real> {
    /// Frame at each partition node `s_i`.
    pub nodes: Vec<FramePoint<T>>,
    /// Frame at every substep boundary, `n·substeps + 1` entries.
    pub samples: Vec<FramePoint<T>>,
    pub substeps: usize,
}

impl<T: Real> DevelopedPath<T> {
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn endpoint(&self) -> &DVector<T> {
        &self.nodes[self.n()].point
    }

    /// Frame in effect at time `t` (left endpoint of the containing substep).
    pub fn frame_at(&self, t: T) -> &FramePoint<T> {
        let m = self.samples.len() - 1;
        let idx = (t * T::count(m)).floor().as_f64();
        let idx = if idx.is_finite() && idx > 0.0 { (idx as usize).min(m) } else { 0 };
        &self.samples[idx]
    }
}

/// Cartan development of `omega` starting from the standard frame.
pub fn develop<T: Real>(
    m: &ManifoldSpec<T>,
    omega: &DrivingPath<T>,
    substeps: usize,
    method: Integrator,
) -> Result<DevelopedPath<T>> {
    if substeps == 0 {
        return Err(Error::Argument("substeps must be at least 1".into()));
    }
    if omega.dim() != m.dim {
        return Err(Error::Argument("path dimension differs from manifold dimension".into()));
    }
    let start = m.origin();
    let n = omega.n();
    let h = T::one() / T::count(n * substeps);
    let mut nodes = Vec::with_capacity(n + 1);
    let mut samples = Vec::with_capacity(n * substeps + 1);
    let mut cur = start;
    nodes.push(cur.clone());
    samples.push(cur.clone());
    for i in 0..n {
        let v = omega.velocity(i);
        for _ in 0..substeps {
            cur = match (m.kind, method) {
                (ManifoldKind::Euclidean, _) => FramePoint {
                    point: &cur.point + &cur.frame * &v * h,
                    frame: cur.frame.clone(),
                },
                (ManifoldKind::Sphere { radius }, Integrator::Exact) => sphere_step_exact(&cur, &v, h, radius),
                (ManifoldKind::Sphere { radius }, Integrator::Rk4) => sphere_step_rk4(m, &cur, &v, h, radius)?,
            };
            samples.push(cur.clone());
        }
        nodes.push(cur.clone());
    }
    Ok(DevelopedPath { nodes, samples, substeps })
}

/// Moves along the great circle with initial velocity `frame·v` for time `h`.
fn sphere_step_exact<T: Real>(cur: &FramePoint<T>, v: &DVector<T>, h: T, radius: T) -> FramePoint<T> {
    let w = &cur.frame * v;
    let speed = w.norm();
    if speed == T::zero() {
        return cur.clone();
    }
    let theta = speed * h / radius;
    let what = &w / speed;
    let phat = &cur.point / radius;
    let (s, c) = theta.sin_cos();
    let point = (&phat * c + &what * s) * radius;
    let coeff = cur.frame.transpose() * &what;
    let dir = &what * (c - T::one()) - &phat * s;
    let frame = &cur.frame + dir * coeff.transpose();
    FramePoint { point, frame }
}

fn sphere_step_rk4<T: Real>(
    m: &ManifoldSpec<T>,
    cur: &FramePoint<T>,
    v: &DVector<T>,
    h: T,
    radius: T,
) -> Result<FramePoint<T>> {
    let inv_r2 = T::one() / (radius * radius);
    let rhs = |p: &DVector<T>, u: &DMatrix<T>| -> (DVector<T>, DMatrix<T>) {
        (u * v, -(p * v.transpose()) * inv_r2)
    };
    let half = T::lit(0.5);
    let (k1p, k1u) = rhs(&cur.point, &cur.frame);
    let (k2p, k2u) = rhs(&(&cur.point + &k1p * (h * half)), &(&cur.frame + &k1u * (h * half)));
    let (k3p, k3u) = rhs(&(&cur.point + &k2p * (h * half)), &(&cur.frame + &k2u * (h * half)));
    let (k4p, k4u) = rhs(&(&cur.point + &k3p * h), &(&cur.frame + &k3u * h));
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let p = &cur.point + (k1p + &k2p * two + &k3p * two + k4p) * sixth;
    let u = &cur.frame + (k1u + &k2u * two + &k3u * two + k4u) * sixth;
    let point = m.project_point(&p);
    let tangent = m.project_tangent(&point, &u);
    let frame = linalg::polar_orthonormalize(&tangent)?;
    let res = linalg::orthonormality_residual(&frame);
    if !(res <= T::lit(1e-6)) {
        return Err(Error::Numeric(format!("frame drift {:.3e} after projection", res.as_f64())));
    }
    Ok(FramePoint { point, frame })
}

/// Inverse of [`develop`]: frame coordinates of the chord velocities.
pub fn antidevelop<T: Real>(m: &ManifoldSpec<T>, sigma: &DevelopedPath<T>) -> Result<DrivingPath<T>> {
    let increments = sigma
        .nodes
        .windows(2)
        .map(|w| {
            let tangent = m.log_map(&w[0].point, &w[1].point);
            w[0].frame.transpose() * tangent
        })
        .collect();
    DrivingPath::new(increments)
}

/// `½∫|σ′|²` from geodesic chord lengths between consecutive samples.
pub fn path_energy<T: Real>(m: &ManifoldSpec<T>, sigma: &DevelopedPath<T>) -> T {
    let steps = sigma.samples.len() - 1;
    let h = T::one() / T::count(steps);
    sigma
        .samples
        .windows(2)
        .fold(T::zero(), |acc, w| {
            let len = m.distance(&w[0].point, &w[1].point);
            acc + len * len / h
        })
        * T::lit(0.5)
}
