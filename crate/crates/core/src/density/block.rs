use nalgebra::DMatrix;

use crate::linalg;
use crate::scalar::Real;

/// `n × n` grid of `d × d` blocks backed by a dense `(nd) × (nd)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix<T: Real> {
    pub n: usize,
    pub d: usize,
    pub dense: DMatrix<T>,
}

impl<T: Real> BlockMatrix<T> {
    pub fn zeros(n: usize, d: usize) -> Self {
        BlockMatrix { n, d, dense: DMatrix::zeros(n * d, n * d) }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        BlockMatrix { n, d, dense: DMatrix::identity(n * d, n * d) }
    }

    pub fn from_dense(n: usize, d: usize, dense: DMatrix<T>) -> Self {
        assert_eq!(dense.nrows(), n * d);
        assert_eq!(dense.ncols(), n * d);
        BlockMatrix { n, d, dense }
    }

    /// Builds from a block function `(i, j) ↦ Some(block)`.
    pub fn from_blocks<F: FnMut(usize, usize) -> Option<DMatrix<T>>>(n: usize, d: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n, d);
        for i in 0..n {
            for j in 0..n {
                if let Some(b) = f(i, j) {
                    m.set_block(i, j, &b);
                }
            }
        }
        m
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrix<T> {
        self.dense.view((i * self.d, j * self.d), (self.d, self.d)).into_owned()
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &DMatrix<T>) {
        self.dense.view_mut((i * self.d, j * self.d), (self.d, self.d)).copy_from(b);
    }

    pub fn add_block(&mut self, i: usize, j: usize, b: &DMatrix<T>) {
        let mut v = self.dense.view_mut((i * self.d, j * self.d), (self.d, self.d));
        v += b;
    }

    pub fn transpose(&self) -> Self {
        BlockMatrix { n: self.n, d: self.d, dense: self.dense.transpose() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        BlockMatrix { n: self.n, d: self.d, dense: &self.dense * &other.dense }
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        linalg::max_abs_diff(&self.dense, &self.dense.transpose()) <= tol
    }

    /// `T^n`: identity diagonal, `−I` on the first subdiagonal.
    pub fn unit_lower_bidiagonal(n: usize, d: usize) -> Self {
        let eye = DMatrix::identity(d, d);
        Self::from_blocks(n, d, |i, j| {
            if i == j {
                Some(eye.clone())
            } else if i == j + 1 {
                Some(-eye.clone())
            } else {
                None
            }
        })
    }

    /// `S^n = (T^n)^{-1}`: identity blocks on and below the diagonal.
    pub fn lower_ones(n: usize, d: usize) -> Self {
        let eye = DMatrix::identity(d, d);
        Self::from_blocks(n, d, |i, j| (i >= j).then(|| eye.clone()))
    }

    /// `B^n = S^n (S^n)ᵀ`.
    pub fn min_index_gram(n: usize, d: usize) -> Self {
        let s = Self::lower_ones(n, d);
        s.mul(&s.transpose())
    }
}
