//! Small dense linear algebra: vectors, matrices, SPD solves, the Woodbury
//! identity and ensemble sample statistics.

mod factor;
mod matrix;
mod stats;
mod vector;
mod woodbury;

pub use factor::{psd_factor, solve_spd, Cholesky, Lu, JITTER};
pub use matrix::{matmul, trace, transpose, Matrix};
pub use stats::{sample_covariance, sample_mean};
pub use vector::Vector;
pub use woodbury::woodbury_inverse;
