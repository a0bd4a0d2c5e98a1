//! Piecewise-geodesic approximations of Brownian path integrals on spheres and flat space.
//!
//! Every numeric routine is generic over [`Real`]; the aliases below fix `f64`.

pub mod density;
pub mod development;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod jacobi;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod wiener;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Manifold = geometry::ManifoldSpec<f64>;
pub type Frame = geometry::FramePoint<f64>;
pub type Curvature = geometry::CurvatureInFrame<f64>;
pub type Driver = development::DrivingPath<f64>;
pub type Developed = development::DevelopedPath<f64>;
pub type Segment = jacobi::SegmentOperator<f64>;
pub type Pair = jacobi::JacobiPair<f64>;
pub type Blocks = density::BlockMatrix<f64>;
pub type Kernel = wiener::KernelDiscretization<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

pub use nalgebra;
