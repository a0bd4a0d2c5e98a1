//! Gauss–Legendre rules and compensated summation.

use crate::scalar::Real;

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds a `q`-point rule (Newton iteration on `P_q` in double precision).
    pub fn new(q: usize) -> Self {
        assert!(q >= 1, "quadrature needs at least one node");
        let (x, w) = legendre_f64(q);
        let nodes = x.iter().map(|&t| T::lit(0.5 * (t + 1.0))).collect();
        let weights = w.iter().map(|&t| T::lit(0.5 * t)).collect();
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let h = b - a;
        (
            self.nodes.iter().map(|&t| a + h * t).collect(),
            self.weights.iter().map(|&w| h * w).collect(),
        )
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let (x, w) = self.on(a, b);
        let mut acc = T::zero();
        for (xi, wi) in x.into_iter().zip(w) {
            acc += wi * f(xi);
        }
        acc
    }
}

fn legendre_f64(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let m = (q + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(q, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_eval(q: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Neumaier-compensated running sum; the order of `add` calls fixes the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean and standard error of a sample, accumulated in index order.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut s = CompensatedSum::new();
    for &x in xs {
        s.add(x);
    }
    let mean = s.value() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let mut v = CompensatedSum::new();
    for &x in xs {
        v.add((x - mean) * (x - mean));
    }
    let var = v.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
