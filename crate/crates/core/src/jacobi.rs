//! Per-segment solutions of `Z″ = A(s)Z` and the bound functions used to control them.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Coefficient of the Jacobi equation on one segment.
#[derive(Clone)]
pub enum OperatorKind<T: Real> {
    Constant(DMatrix<T>),
    Variable(Arc<dyn Fn(T) -> DMatrix<T> + Send + Sync>),
}

/// `s ∈ [0, Δ] ↦ A(s)` with a known bound `sup ‖A‖ ≤ kappa_bound`.
#[derive(Clone)]
pub struct SegmentOperator<T: Real> {
    pub kind: OperatorKind<T>,
    pub delta: T,
    pub kappa_bound: T,
}

impl<T: Real> std::fmt::Debug for SegmentOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            OperatorKind::Constant(_) => "constant",
            OperatorKind::Variable(_) => "variable",
        };
        f.debug_struct("SegmentOperator")
            .field("kind", &kind)
            .field("delta", &self.delta.as_f64())
            .field("kappa_bound", &self.kappa_bound.as_f64())
            .finish()
    }
}

impl<T: Real> SegmentOperator<T> {
    pub fn constant(a: DMatrix<T>, delta: T) -> Self {
        let kappa_bound = linalg::spectral_norm(&a);
        SegmentOperator { kind: OperatorKind::Constant(a), delta, kappa_bound }
    }

    pub fn variable<F>(f: F, delta: T, kappa_bound: T) -> Self
    where
        F: Fn(T) -> DMatrix<T> + Send + Sync + 'static,
    {
        SegmentOperator { kind: OperatorKind::Variable(Arc::new(f)), delta, kappa_bound }
    }

    pub fn eval(&self, s: T) -> DMatrix<T> {
        match &self.kind {
            OperatorKind::Constant(a) => a.clone(),
            OperatorKind::Variable(f) => f(s),
        }
    }

    pub fn dim(&self) -> usize {
        self.eval(T::zero()).nrows()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, OperatorKind::Constant(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacobiMethod {
    /// Fixed-step classical fourth-order integration, `substeps` per node gap.
    Rk4 { substeps: usize },
    /// Closed form through the eigendecomposition of a constant `A`.
    Spectral,
}

/// `C, S, C′, S′` at one point of the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSample<T: Real> {
    pub c: DMatrix<T>,
    pub s: DMatrix<T>,
    pub dc: DMatrix<T>,
    pub ds: DMatrix<T>,
}

impl<T: Real> JacobiSample<T> {
    pub fn initial(d: usize) -> Self {
        JacobiSample {
            c: DMatrix::identity(d, d),
            s: DMatrix::zeros(d, d),
            dc: DMatrix::zeros(d, d),
            ds: DMatrix::identity(d, d),
        }
    }
}

/// Fundamental solutions on `[0, Δ]` sampled at Gauss–Legendre nodes and at `Δ`.
#[derive(Debug, Clone)]
pub struct JacobiPair<T: Real> {
    pub delta: T,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub at_nodes: Vec<JacobiSample<T>>,
    pub start: JacobiSample<T>,
    pub end: JacobiSample<T>,
}

impl<T: Real> JacobiPair<T> {
    pub fn dim(&self) -> usize {
        self.start.c.nrows()
    }

    /// `∫_0^Δ X(s)ᵀY(s) ds` by the node rule.
    pub fn integrate_product<F, G>(&self, x: F, y: G) -> DMatrix<T>
    where
        F: Fn(&JacobiSample<T>) -> &DMatrix<T>,
        G: Fn(&JacobiSample<T>) -> &DMatrix<T>,
    {
        let d = self.dim();
        let mut acc = DMatrix::zeros(d, d);
        for (smp, &w) in self.at_nodes.iter().zip(&self.weights) {
            acc += x(smp).transpose() * y(smp) * w;
        }
        acc
    }

    /// Node positions followed by `Δ`.
    pub fn points(&self) -> impl Iterator<Item = (T, &JacobiSample<T>)> {
        self.nodes
            .iter()
            .copied()
            .zip(self.at_nodes.iter())
            .chain(std::iter::once((self.delta, &self.end)))
    }
}

/// Solves `C″ = AC, S″ = AS` with `C(0)=I, C′(0)=0, S(0)=0, S′(0)=I`.
pub fn solve_segment<T: Real>(a: &SegmentOperator<T>, quad_nodes: usize, method: JacobiMethod) -> Result<JacobiPair<T>> {
    let rule = GaussLegendre::<T>::new(quad_nodes);
    let (nodes, weights) = rule.on(T::zero(), a.delta);
    let d = a.dim();
    let (at_nodes, end) = match method {
        JacobiMethod::Spectral => {
            let OperatorKind::Constant(m) = &a.kind else {
                return Err(Error::Argument("spectral solver needs a constant operator".into()));
            };
            let eig = SymmetricEigen::new(linalg::symmetric_part(m));
            let eval = |s: T| spectral_sample(&eig, s);
            (nodes.iter().map(|&s| eval(s)).collect::<Vec<_>>(), eval(a.delta))
        }
        JacobiMethod::Rk4 { substeps } => {
            if substeps == 0 {
                return Err(Error::Argument("substeps must be at least 1".into()));
            }
            let mut breaks = nodes.clone();
            breaks.push(a.delta);
            let mut y = DMatrix::zeros(d, 2 * d);
            let mut dy = DMatrix::zeros(d, 2 * d);
            for i in 0..d {
                y[(i, i)] = T::one();
                dy[(i, d + i)] = T::one();
            }
            let mut t = T::zero();
            let mut out = Vec::with_capacity(breaks.len());
            for &b in &breaks {
                let h = (b - t) / T::count(substeps);
                for _ in 0..substeps {
                    rk4_step(a, t, h, &mut y, &mut dy);
                    t += h;
                }
                t = b;
                out.push(JacobiSample {
                    c: y.columns(0, d).into_owned(),
                    s: y.columns(d, d).into_owned(),
                    dc: dy.columns(0, d).into_owned(),
                    ds: dy.columns(d, d).into_owned(),
                });
            }
            let end = out.pop().expect("segment endpoint");
            (out, end)
        }
    };
    Ok(JacobiPair { delta: a.delta, nodes, weights, at_nodes, start: JacobiSample::initial(d), end })
}

fn rk4_step<T: Real>(a: &SegmentOperator<T>, t: T, h: T, y: &mut DMatrix<T>, dy: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    let a0 = a.eval(t);
    let am = a.eval(t + h * half);
    let a1 = a.eval(t + h);
    let k1y = dy.clone();
    let k1v = &a0 * &*y;
    let k2y = &*dy + &k1v * (h * half);
    let k2v = &am * (&*y + &k1y * (h * half));
    let k3y = &*dy + &k2v * (h * half);
    let k3v = &am * (&*y + &k2y * (h * half));
    let k4y = &*dy + &k3v * h;
    let k4v = &a1 * (&*y + &k3y * h);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    *y += (k1y + k2y * two + k3y * two + k4y) * sixth;
    *dy += (k1v + k2v * two + k3v * two + k4v) * sixth;
}

/// Scalar solutions of `z″ = λz`: `(c, s, c′, s′)`.
pub fn scalar_solutions<T: Real>(lambda: T, s: T) -> (T, T, T, T) {
    let x = lambda * s * s;
    if x.abs() < T::lit(1e-6) {
        let c = T::one() + x / T::lit(2.0) + x * x / T::lit(24.0) + x * x * x / T::lit(720.0);
        let sn = s * (T::one() + x / T::lit(6.0) + x * x / T::lit(120.0) + x * x * x / T::lit(5040.0));
        return (c, sn, lambda * sn, c);
    }
    if lambda > T::zero() {
        let mu = lambda.sqrt();
        let (sh, ch) = ((mu * s).sinh(), (mu * s).cosh());
        (ch, sh / mu, mu * sh, ch)
    } else {
        let mu = (-lambda).sqrt();
        let (sn, cs) = (mu * s).sin_cos();
        (cs, sn / mu, -mu * sn, cs)
    }
}

fn spectral_sample<T: Real>(eig: &SymmetricEigen<T, nalgebra::Dyn>, s: T) -> JacobiSample<T> {
    let q = &eig.eigenvectors;
    let d = q.nrows();
    let mut dc = DMatrix::zeros(d, d);
    let mut ds = DMatrix::zeros(d, d);
    let mut dcp = DMatrix::zeros(d, d);
    let mut dsp = DMatrix::zeros(d, d);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let (c, sn, cp, sp) = scalar_solutions(lam, s);
        dc[(k, k)] = c;
        ds[(k, k)] = sn;
        dcp[(k, k)] = cp;
        dsp[(k, k)] = sp;
    }
    let qt = q.transpose();
    JacobiSample { c: q * dc * &qt, s: q * ds * &qt, dc: q * dcp * &qt, ds: q * dsp * &qt }
}

/// `|S′ᵀS′(Δ) − I − ∫_0^Δ (SᵀAS′ + S′ᵀAS)|`, the integrated Wronskian-type identity.
pub fn wronskian_residual<T: Real>(pair: &JacobiPair<T>, a: &SegmentOperator<T>) -> T {
    let d = pair.dim();
    let mut integral = DMatrix::zeros(d, d);
    for ((smp, &w), &s) in pair.at_nodes.iter().zip(&pair.weights).zip(&pair.nodes) {
        let am = a.eval(s);
        integral += (smp.s.transpose() * &am * &smp.ds + smp.ds.transpose() * &am * &smp.s) * w;
    }
    let lhs = pair.end.ds.transpose() * &pair.end.ds - DMatrix::identity(d, d);
    linalg::max_abs_diff(&lhs, &integral)
}

/// `ψ(s) = min(1 + cosh(s)s⁴/16, cosh s)`.
pub fn psi<T: Real>(s: T) -> T {
    let ch = s.cosh();
    let s2 = s * s;
    (T::one() + ch * s2 * s2 / T::lit(16.0)).min(ch)
}

/// `h(t) = ln ψ(√t) / t`, with `h(0) = 0`.
pub fn h_fn<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let r = t.sqrt();
    let ch = r.cosh();
    let poly = (ch * t * t / T::lit(16.0)).ln_1p();
    poly.min(ch.ln()) / t
}

/// Envelope `g ≥ h` and the ratio `u = e^{−2t(g−h)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// `g = h` on `[0, t0]`.
    pub t0: f64,
    /// Plateau reached at `2·t0`.
    pub height: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope { t0: 0.25, height: 0.6 }
    }
}

impl Envelope {
    pub fn g<T: Real>(&self, t: T) -> T {
        let h = h_fn(t);
        let t0 = T::lit(self.t0);
        if t <= t0 {
            return h;
        }
        let top = T::lit(self.height);
        let step = if t >= t0 + t0 {
            top
        } else {
            let x = (t - t0) / t0;
            let h0 = h_fn(t0);
            h0 + (top - h0) * x * x * (T::lit(3.0) - x - x)
        };
        step.max(h)
    }

    pub fn u<T: Real>(&self, t: T) -> T {
        (-(t + t) * (self.g(t) - h_fn(t))).exp()
    }

    /// `φ(s) = e^{s² g(s²)}`.
    pub fn phi<T: Real>(&self, s: T) -> T {
        let t = s * s;
        (t * self.g(t)).exp()
    }

    /// `(min (g − h), sup g, sup t·u(t))` over `t ∈ (0, t_max]` on `points` samples.
    pub fn scan(&self, t_max: f64, points: usize) -> (f64, f64, f64) {
        let mut min_gap = f64::INFINITY;
        let mut sup_g = 0f64;
        let mut sup_tu = 0f64;
        for i in 1..=points {
            let t = t_max * i as f64 / points as f64;
            let g = self.g(t);
            min_gap = min_gap.min(g - h_fn(t));
            sup_g = sup_g.max(g);
            sup_tu = sup_tu.max(t * self.u(t));
        }
        (min_gap, sup_g, sup_tu)
    }
}

/// Margins `bound − actual` per evaluation point.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub points: Vec<f64>,
    /// Five bounds on `‖C‖, ‖S‖, ‖C′‖, ‖S′‖, ‖S′ᵀS′ − I‖`.
    pub cs_margins: [Vec<f64>; 5],
    /// Growth bounds for `C − I` and `S`.
    pub global_margins: [Vec<f64>; 2],
    /// Second-order expansions of `S′, S/s, C`.
    pub expansion_margins: [Vec<f64>; 3],
    /// `−κI ≤ A ≤ 0` at every evaluated point.
    pub hypothesis_holds: bool,
    pub min_margin: f64,
}

/// Evaluates every Jacobi bound at the nodes of `pair` and at `Δ`.
pub fn estimate_suite<T: Real>(pair: &JacobiPair<T>, a: &SegmentOperator<T>) -> EstimateReport {
    let d = pair.dim();
    let eye = DMatrix::<T>::identity(d, d);
    let kappa = a.kappa_bound;
    let rk = kappa.sqrt();
    let inner = GaussLegendre::<T>::new(12);
    let tol = T::tol(1e-12) * (T::one() + kappa);
    let mut hyp = true;
    let mut points = Vec::new();
    let mut cs: [Vec<f64>; 5] = Default::default();
    let mut glob: [Vec<f64>; 2] = Default::default();
    let mut exp: [Vec<f64>; 3] = Default::default();
    let norm = linalg::spectral_norm::<T>;
    for (s, smp) in pair.points() {
        let am = a.eval(s);
        let ev = linalg::sym_eigenvalues(&am);
        if ev[d - 1] > tol || ev[0] < -kappa - tol {
            hyp = false;
        }
        let x = rk * s;
        let ps = psi(x);
        let ks2 = kappa * s * s;
        cs[0].push((ps - norm(&smp.c)).as_f64());
        cs[1].push((s * ps - norm(&smp.s)).as_f64());
        cs[2].push((kappa * s * ps - norm(&smp.dc)).as_f64());
        cs[3].push((T::one() + ks2 * ps * T::lit(0.5) - norm(&smp.ds)).as_f64());
        let gram = smp.ds.transpose() * &smp.ds - &eye;
        cs[4].push((ps * ks2 + ps * ps * ks2 * ks2 / T::lit(3.0) - norm(&gram)).as_f64());
        let sinh_term = if kappa > T::zero() { x.sinh() / rk } else { s };
        glob[0].push((x.cosh() - T::one() - norm(&(&smp.c - &eye))).as_f64());
        glob[1].push((sinh_term - norm(&smp.s)).as_f64());
        let tail = ks2 * ks2 * x.cosh();
        let (rs, ws) = inner.on(T::zero(), s);
        let mut m1 = DMatrix::zeros(d, d);
        let mut m2 = DMatrix::zeros(d, d);
        let mut m3 = DMatrix::zeros(d, d);
        for (&r, &w) in rs.iter().zip(&ws) {
            let ar = a.eval(r);
            m1 += &ar * (r * w);
            m2 += &ar * ((s - r) * r * w);
            m3 += &ar * ((s - r) * w);
        }
        exp[0].push((tail - norm(&(&smp.ds - &eye - m1))).as_f64());
        let ratio = if s > T::zero() {
            norm(&(&smp.s / s - &eye - m2 / s))
        } else {
            T::zero()
        };
        exp[1].push((tail - ratio).as_f64());
        exp[2].push((tail - norm(&(&smp.c - &eye - m3))).as_f64());
        points.push(s.as_f64());
    }
    let min_margin = cs
        .iter()
        .chain(glob.iter())
        .chain(exp.iter())
        .flat_map(|v| v.iter().copied())
        .fold(f64::INFINITY, f64::min);
    EstimateReport {
        points,
        cs_margins: cs,
        global_margins: glob,
        expansion_margins: exp,
        hypothesis_holds: hyp,
        min_margin,
    }
}
