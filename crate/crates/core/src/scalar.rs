//! Scalar abstraction shared by every numeric module.

use approx::AbsDiffEq;
use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by the library (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Machine epsilon of the type.
    #[inline]
    fn epsilon() -> Self {
        <Self as AbsDiffEq>::default_epsilon()
    }

    /// `max(tol, 64ε)`, so fixed f64 tolerances stay meaningful in lower precision.
    #[inline]
    fn tol(tol: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}
