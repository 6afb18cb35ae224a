//! Multivariate gamma function, the matrix-variate Dirichlet density, a
//! matrix-parametrized multinomial analogue, and numerical verification of the
//! logarithmic complete monotonicity of their gamma-function ratios.

pub mod distributions;
mod error;
pub mod lab;
pub mod matrix;
pub mod mvgamma;
pub mod report;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use matrix::{MatrixPartition, SimplexPoint, SymMatrix};
pub use special::PolyOrder;
