//! Manifold backends, orthonormal frames and curvature contractions.
//!
//! Curvature is stored in frame coordinates as `R[i][j][k][l] = ⟨Ω(e_i,e_j)e_k, e_l⟩`
//! where `Ω(x,y)z = ∇_x∇_y z − ∇_y∇_x z − ∇_{[x,y]} z`. With this convention the
//! round sphere has `Ω(x,y)z = κ(⟨y,z⟩x − ⟨x,z⟩y)`, the tidal operator
//! `Ω(v,·)v` is negative semidefinite, and sectional curvature is read off as
//! `⟨Ω(x,y)y, x⟩ / |x ∧ y|²`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Tolerance for frame validation.
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ManifoldKind<T> {
    Euclidean,
    Sphere { radius: T },
}

/// `R^d` or the round sphere `S^d(r) ⊂ R^{d+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec<T> {
    pub kind: ManifoldKind<T>,
    pub dim: usize,
}

impl<T: Real> ManifoldSpec<T> {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be at least 1".into()));
        }
        Ok(ManifoldSpec { kind: ManifoldKind::Euclidean, dim })
    }

    pub fn sphere(dim: usize, radius: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be at least 1".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Argument("sphere radius must be positive".into()));
        }
        Ok(ManifoldSpec { kind: ManifoldKind::Sphere { radius }, dim })
    }

    /// Sphere with prescribed constant curvature `κ > 0`.
    pub fn sphere_with_curvature(dim: usize, kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::Argument("curvature must be positive".into()));
        }
        Self::sphere(dim, T::one() / kappa.sqrt())
    }

    pub fn embed_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean => self.dim,
            ManifoldKind::Sphere { .. } => self.dim + 1,
        }
    }

    /// Constant sectional curvature of the backend.
    pub fn curvature(&self) -> T {
        match self.kind {
            ManifoldKind::Euclidean => T::zero(),
            ManifoldKind::Sphere { radius } => T::one() / (radius * radius),
        }
    }

    /// `K := sup_u ‖S_u‖`.
    pub fn curvature_bound(&self) -> T {
        self.curvature()
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ManifoldKind::Euclidean)
    }

    /// Base point `o` with its standard frame `u_o`.
    ///
    /// For the sphere `o = r·e_{d+1}` and `u_o = [e_1 … e_d]`.
    pub fn origin(&self) -> FramePoint<T> {
        let n = self.embed_dim();
        let mut point = DVector::zeros(n);
        if let ManifoldKind::Sphere { radius } = self.kind {
            point[self.dim] = radius;
        }
        let mut frame = DMatrix::zeros(n, self.dim);
        for i in 0..self.dim {
            frame[(i, i)] = T::one();
        }
        FramePoint { point, frame }
    }

    /// Nearest point projection onto the manifold.
    pub fn project_point(&self, p: &DVector<T>) -> DVector<T> {
        match self.kind {
            ManifoldKind::Euclidean => p.clone(),
            ManifoldKind::Sphere { radius } => p * (radius / p.norm()),
        }
    }

    /// Orthogonal projection `P(p)` of ambient vectors onto `T_pM`.
    pub fn project_tangent(&self, p: &DVector<T>, v: &DMatrix<T>) -> DMatrix<T> {
        match self.kind {
            ManifoldKind::Euclidean => v.clone(),
            ManifoldKind::Sphere { .. } => {
                let n = p / p.norm();
                v - &n * (n.transpose() * v)
            }
        }
    }

    /// Riemannian distance between two points of the manifold.
    pub fn distance(&self, p: &DVector<T>, q: &DVector<T>) -> T {
        match self.kind {
            ManifoldKind::Euclidean => (p - q).norm(),
            ManifoldKind::Sphere { radius } => radius * unit_angle(p, q),
        }
    }

    /// Riemannian logarithm `log_p q` as an ambient tangent vector.
    pub fn log_map(&self, p: &DVector<T>, q: &DVector<T>) -> DVector<T> {
        match self.kind {
            ManifoldKind::Euclidean => q - p,
            ManifoldKind::Sphere { radius } => {
                let theta = unit_angle(p, q);
                let pu = p / p.norm();
                let qu = q / q.norm();
                let w = &qu - &pu * pu.dot(&qu);
                let wn = w.norm();
                if wn == T::zero() {
                    DVector::zeros(p.len())
                } else {
                    w * (radius * theta / wn)
                }
            }
        }
    }

    /// Checks the frame invariants of `f` at tolerance `tol`.
    pub fn validate(&self, f: &FramePoint<T>, tol: T) -> Result<()> {
        let n = self.embed_dim();
        if f.point.len() != n || f.frame.nrows() != n || f.frame.ncols() != self.dim {
            return Err(Error::InvalidFrame(format!(
                "expected point in R^{n} and {n}×{} frame",
                self.dim
            )));
        }
        let res = linalg::orthonormality_residual(&f.frame);
        if !(res <= tol) {
            return Err(Error::InvalidFrame(format!(
                "orthonormality residual {:.3e}",
                res.as_f64()
            )));
        }
        if let ManifoldKind::Sphere { radius } = self.kind {
            let rad = (f.point.norm() - radius).abs();
            if !(rad <= tol * radius) {
                return Err(Error::InvalidFrame(format!("point off sphere by {:.3e}", rad.as_f64())));
            }
            let tang = (f.frame.transpose() * &f.point).amax() / radius;
            if !(tang <= tol) {
                return Err(Error::InvalidFrame(format!(
                    "frame not tangent, residual {:.3e}",
                    tang.as_f64()
                )));
            }
        }
        Ok(())
    }
}

/// Angle between two nonzero vectors, stable near 0 and π.
pub fn unit_angle<T: Real>(p: &DVector<T>, q: &DVector<T>) -> T {
    let pu = p / p.norm();
    let qu = q / q.norm();
    let s = (&pu - &qu).norm();
    let c = (&pu + &qu).norm();
    T::lit(2.0) * s.atan2(c)
}

/// A point together with an orthonormal frame of its tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint<T: Real> {
    pub point: DVector<T>,
    /// `embed_dim × d`, columns orthonormal and tangent.
    pub frame: DMatrix<T>,
}

impl<T: Real> FramePoint<T> {
    /// Right action by an orthogonal `d × d` matrix.
    pub fn rotate(&self, g: &DMatrix<T>) -> Self {
        FramePoint { point: self.point.clone(), frame: &self.frame * g }
    }
}

/// Rank-4 curvature tensor in frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureInFrame<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> CurvatureInFrame<T> {
    pub fn zero(dim: usize) -> Self {
        CurvatureInFrame { dim, data: vec![T::zero(); dim.pow(4)] }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> T>(dim: usize, mut f: F) -> Self {
        let mut c = Self::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let at = c.index(i, j, k, l);
                        c.data[at] = f(i, j, k, l);
                    }
                }
            }
        }
        c
    }

    /// `κ(δ_jk δ_il − δ_ik δ_jl)`.
    pub fn constant(dim: usize, kappa: T) -> Self {
        let kd = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
        Self::from_fn(dim, |i, j, k, l| kappa * (kd(j, k) * kd(i, l) - kd(i, k) * kd(j, l)))
    }

    /// Projects an arbitrary rank-4 array onto algebraic curvature tensors.
    ///
    /// Antisymmetrizes both index pairs, symmetrizes under pair exchange and
    /// removes the totally antisymmetric part so the cyclic identity holds.
    pub fn from_raw(dim: usize, raw: &[T]) -> Result<Self> {
        if raw.len() != dim.pow(4) {
            return Err(Error::Argument(format!("raw tensor needs {} entries", dim.pow(4))));
        }
        let at = |i: usize, j: usize, k: usize, l: usize| raw[((i * dim + j) * dim + k) * dim + l];
        let quarter = T::lit(0.25);
        let anti = Self::from_fn(dim, |i, j, k, l| {
            (at(i, j, k, l) - at(j, i, k, l) - at(i, j, l, k) + at(j, i, l, k)) * quarter
        });
        let half = T::lit(0.5);
        let pair = Self::from_fn(dim, |i, j, k, l| (anti.get(i, j, k, l) + anti.get(k, l, i, j)) * half);
        let third = T::one() / T::lit(3.0);
        Ok(Self::from_fn(dim, |i, j, k, l| {
            let cyc = pair.get(i, j, k, l) + pair.get(j, k, i, l) + pair.get(k, i, j, l);
            pair.get(i, j, k, l) - cyc * third
        }))
    }

    /// A random algebraic curvature tensor (Gaussian raw entries, projected).
    pub fn random<R: Rng + ?Sized>(dim: usize, scale: T, rng: &mut R) -> Self {
        let raw: Vec<T> = (0..dim.pow(4))
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)) * scale)
            .collect();
        Self::from_raw(dim, &raw).expect("sized raw tensor")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.data[self.index(i, j, k, l)]
    }

    pub fn scaled(&self, s: T) -> Self {
        CurvatureInFrame { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Components in the rotated frame `u ∘ g`.
    pub fn rotated(&self, g: &DMatrix<T>) -> Self {
        let d = self.dim;
        let mut cur = self.data.clone();
        for axis in 0..4 {
            let mut next = vec![T::zero(); cur.len()];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let idx = [i, j, k, l];
                            let mut acc = T::zero();
                            for m in 0..d {
                                let mut src = idx;
                                src[axis] = m;
                                acc += g[(m, idx[axis])] * cur[((src[0] * d + src[1]) * d + src[2]) * d + src[3]];
                            }
                            next[((i * d + j) * d + k) * d + l] = acc;
                        }
                    }
                }
            }
            cur = next;
        }
        CurvatureInFrame { dim: d, data: cur }
    }

    /// `R_u(x, y, w, z) = ⟨Ω(x,y)w, z⟩`.
    pub fn form(&self, x: &DVector<T>, y: &DVector<T>, w: &DVector<T>, z: &DVector<T>) -> T {
        let d = self.dim;
        let mut acc = T::zero();
        for i in 0..d {
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == T::zero() {
                    continue;
                }
                for k in 0..d {
                    for l in 0..d {
                        acc += xy * w[k] * z[l] * self.get(i, j, k, l);
                    }
                }
            }
        }
        acc
    }

    /// `Ω(x, y)w`.
    pub fn apply(&self, x: &DVector<T>, y: &DVector<T>, w: &DVector<T>) -> DVector<T> {
        let d = self.dim;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == T::zero() {
                    continue;
                }
                for k in 0..d {
                    let c = xy * w[k];
                    if c == T::zero() {
                        continue;
                    }
                    for l in 0..d {
                        out[l] += c * self.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ Ω(x, y)w`.
    pub fn middle_slot(&self, x: &DVector<T>, w: &DVector<T>) -> DMatrix<T> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.apply(x, &basis(d, j), w);
            m.set_column(j, &col);
        }
        m
    }

    /// Maximum residual over the four algebraic symmetries.
    pub fn symmetry_residual(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let r = self.get(i, j, k, l);
                        worst = worst.max((r + self.get(j, i, k, l)).abs());
                        worst = worst.max((r + self.get(i, j, l, k)).abs());
                        worst = worst.max((r - self.get(k, l, i, j)).abs());
                        let cyc = r + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(cyc.abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn basis<T: Real>(d: usize, i: usize) -> DVector<T> {
    let mut e = DVector::zeros(d);
    e[i] = T::one();
    e
}

/// Curvature of `m` expressed in the frame `f`.
pub fn curvature_in_frame<T: Real>(m: &ManifoldSpec<T>, f: &FramePoint<T>) -> Result<CurvatureInFrame<T>> {
    m.validate(f, T::tol(FRAME_TOL))?;
    Ok(match m.kind {
        ManifoldKind::Euclidean => CurvatureInFrame::zero(m.dim),
        ManifoldKind::Sphere { .. } => CurvatureInFrame::constant(m.dim, m.curvature()),
    })
}

/// `A = Ω(v, ·)v`.
pub fn tidal_operator<T: Real>(c: &CurvatureInFrame<T>, v: &DVector<T>) -> DMatrix<T> {
    let d = c.dim();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for k in 0..d {
            let vv = v[i] * v[k];
            if vv == T::zero() {
                continue;
            }
            for j in 0..d {
                for l in 0..d {
                    a[(l, j)] += vv * c.get(i, j, k, l);
                }
            }
        }
    }
    a
}

/// `Ric v = Σ_i Ω(v, e_i)e_i` as a matrix.
pub fn ricci<T: Real>(c: &CurvatureInFrame<T>) -> DMatrix<T> {
    let d = c.dim();
    DMatrix::from_fn(d, d, |l, a| {
        let mut acc = T::zero();
        for i in 0..d {
            acc += c.get(a, i, i, l);
        }
        acc
    })
}

pub fn scalar_curvature<T: Real>(c: &CurvatureInFrame<T>) -> T {
    ricci(c).trace()
}

/// Sectional curvature of `span{x, y}`.
pub fn sectional_curvature<T: Real>(c: &CurvatureInFrame<T>, x: &DVector<T>, y: &DVector<T>) -> T {
    let denom = x.norm_squared() * y.norm_squared() - x.dot(y) * x.dot(y);
    c.form(x, y, y, x) / denom
}

/// `Γ = Σ_{i,j} [Ω(e_i, Ω(e_i,·)e_j)e_j + Ω(e_i, Ω(e_j,·)e_i)e_j + Ω(e_i, Ω(e_j,·)e_j)e_i]`.
pub fn gamma_operator<T: Real>(c: &CurvatureInFrame<T>) -> DMatrix<T> {
    let d = c.dim();
    let e: Vec<DVector<T>> = (0..d).map(|i| basis(d, i)).collect();
    let mut g = DMatrix::zeros(d, d);
    for b in 0..d {
        let y = &e[b];
        let mut col = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let t1 = c.apply(&e[i], &c.apply(&e[i], y, &e[j]), &e[j]);
                let t2 = c.apply(&e[i], &c.apply(&e[j], y, &e[i]), &e[j]);
                let t3 = c.apply(&e[i], &c.apply(&e[j], y, &e[j]), &e[i]);
                col += t1 + t2 + t3;
            }
        }
        g.set_column(b, &col);
    }
    g
}

/// Extreme sectional curvatures `(min, max)`.
///
/// Exact for `d ≤ 3` (every bivector is decomposable, so the extremes are
/// eigenvalues of the curvature operator); for larger `d` an alternating
/// eigen-iteration from `starts` random planes gives inner estimates.
pub fn sectional_extremes<T: Real, R: Rng + ?Sized>(c: &CurvatureInFrame<T>, starts: usize, rng: &mut R) -> (T, T) {
    let d = c.dim();
    if d < 2 {
        return (T::zero(), T::zero());
    }
    if d <= 3 {
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        let p = pairs.len();
        let op = DMatrix::from_fn(p, p, |a, b| {
            let (i, j) = pairs[a];
            let (k, l) = pairs[b];
            -c.get(i, j, k, l)
        });
        let ev = linalg::sym_eigenvalues(&op);
        return (ev[0], ev[p - 1]);
    }
    let mut lo = T::lit(f64::INFINITY);
    let mut hi = T::lit(f64::NEG_INFINITY);
    for s in 0..starts.max(1) {
        let want_max = s % 2 == 0;
        let mut y = random_unit(d, rng);
        let mut val = T::zero();
        for _ in 0..50 {
            let a = tidal_operator(c, &y);
            let eig = SymmetricEigen::new(-a);
            let mut best = None;
            for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
                let q = eig.eigenvectors.column(idx).into_owned();
                if q.dot(&y).abs() > T::lit(1e-6) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bl, _)) => (want_max && lam > bl) || (!want_max && lam < bl),
                };
                if better {
                    best = Some((lam, q));
                }
            }
            let Some((lam, x)) = best else { break };
            let converged = (lam - val).abs() <= T::tol(1e-14);
            val = lam;
            y = x;
            if converged {
                break;
            }
        }
        lo = lo.min(val);
        hi = hi.max(val);
    }
    (lo, hi)
}

/// `‖S_u‖ = sup |S_u(x,y)|`.
pub fn sectional_norm<T: Real, R: Rng + ?Sized>(c: &CurvatureInFrame<T>, rng: &mut R) -> T {
    let (lo, hi) = sectional_extremes(c, 64, rng);
    lo.abs().max(hi.abs())
}

fn random_unit<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<T> {
    loop {
        let v = DVector::from_fn(d, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        if n > T::lit(1e-8) {
            return v / n;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBoundReport {
    /// `max_{i,j} ‖Ω(e_i, ·)e_j‖`.
    pub max_block_norm: f64,
    /// `sup |S_u|` over planes.
    pub sectional_sup: f64,
    /// Largest `|R_u(x,y,w,z)|` over sampled unit quadruples.
    pub sampled_form_max: f64,
    /// Largest `|R_u(x,y,x,y)| / (|x|²|y|²)` over sampled pairs.
    pub sampled_pair_ratio: f64,
    /// Every measured quantity is within `(34/3)‖S_u‖`.
    pub bound_34_3_holds: bool,
    /// `|R_u(x,y,x,y)| ≤ ‖S_u‖|x|²|y|²` on the samples.
    pub pair_bound_holds: bool,
    /// Only meaningful when `sectional_sup < 3/(17d)`.
    pub below_threshold: bool,
    pub block_norm_below_2_over_d: bool,
}

/// Measures the block norms of `c` against its sectional bound.
pub fn curvature_bound_check<T: Real, R: Rng + ?Sized>(
    c: &CurvatureInFrame<T>,
    samples: usize,
    rng: &mut R,
) -> CurvatureBoundReport {
    let d = c.dim();
    let mut max_block = T::zero();
    for i in 0..d {
        for j in 0..d {
            let m = c.middle_slot(&basis(d, i), &basis(d, j));
            max_block = max_block.max(linalg::spectral_norm(&m));
        }
    }
    let s = sectional_norm(c, rng);
    let mut form_max = T::zero();
    let mut pair_ratio = T::zero();
    let mut pair_ok = true;
    let slack = T::tol(1e-12) * (T::one() + s);
    for _ in 0..samples {
        let x = random_unit(d, rng);
        let y = random_unit(d, rng);
        let w = random_unit(d, rng);
        let z = random_unit(d, rng);
        form_max = form_max.max(c.form(&x, &y, &w, &z).abs());
        let scale = T::lit(0.5) + T::lit(rng.random::<f64>() * 2.0);
        let xs = &x * scale;
        let pr = c.form(&xs, &y, &xs, &y).abs();
        let cap = s * xs.norm_squared() * y.norm_squared();
        pair_ratio = pair_ratio.max(pr / (xs.norm_squared() * y.norm_squared()));
        if pr > cap + slack {
            pair_ok = false;
        }
    }
    let bound = T::lit(34.0 / 3.0) * s + slack;
    let below = s < T::lit(3.0) / (T::lit(17.0) * T::count(d));
    CurvatureBoundReport {
        max_block_norm: max_block.as_f64(),
        sectional_sup: s.as_f64(),
        sampled_form_max: form_max.as_f64(),
        sampled_pair_ratio: pair_ratio.as_f64(),
        bound_34_3_holds: max_block <= bound && form_max <= bound,
        pair_bound_holds: pair_ok,
        below_threshold: below,
        block_norm_below_2_over_d: max_block < T::lit(2.0) / T::count(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_sectional_is_positive() {
        let m = ManifoldSpec::sphere(2, 2.0f64).unwrap();
        let c = curvature_in_frame(&m, &m.origin()).unwrap();
        let s = sectional_curvature(&c, &basis(2, 0), &basis(2, 1));
        assert!((s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn scalar_curvature_of_spheres() {
        let c = CurvatureInFrame::constant(3, 0.05f64);
        assert!((scalar_curvature(&c) - 0.3).abs() < 1e-15);
        let c = CurvatureInFrame::constant(2, 1.0f64);
        assert!((scalar_curvature(&c) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tidal_operator_of_sphere() {
        let c = CurvatureInFrame::constant(3, 0.3);
        let v = DVector::from_vec(vec![0.2, -1.0, 0.5]);
        let a = tidal_operator(&c, &v);
        let want = (&v * v.transpose() - DMatrix::identity(3, 3) * v.norm_squared()) * 0.3;
        assert!(linalg::max_abs_diff(&a, &want) < 1e-14);
    }

    #[test]
    fn projection_yields_curvature_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = CurvatureInFrame::<f64>::random(4, 1.0, &mut rng);
        assert!(c.symmetry_residual() < 1e-12);
        let k = CurvatureInFrame::constant(4, 0.7f64);
        let p = CurvatureInFrame::from_raw(4, &k.data).unwrap();
        assert!(p.data.iter().zip(&k.data).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn invalid_frame_rejected() {
        let m = ManifoldSpec::sphere(2, 1.0).unwrap();
        let mut f = m.origin();
        f.frame[(0, 0)] = 2.0;
        assert!(curvature_in_frame(&m, &f).is_err());
        let mut f = m.origin();
        f.frame[(2, 0)] = 0.5;
        f.frame[(0, 0)] = 0.75f64.sqrt();
        assert!(curvature_in_frame(&m, &f).is_err());
    }
}
