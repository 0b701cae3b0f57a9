//! Linear and ensemble Kalman filtering with a Lorenz 63 twin-experiment
//! harness.
//!
//! - [`linalg`]: dense vectors and matrices, SPD solves, the Woodbury
//!   identity, ensemble sample statistics.
//! - [`randomness`]: seeded Box–Muller Gaussian streams with hashed
//!   substreams.
//! - [`dynamics`]: Lorenz 63, fixed-step RK4, scalar iterated maps.
//! - [`kalman`]: the linear Kalman filter.
//! - [`enkf`]: the ensemble Kalman filter with perturbed observations.
//! - [`experiments`]: twin experiments and ensemble-size sweeps.
//! - [`config`], [`commands`], [`svg`]: configuration files, CSV/SVG output
//!   and the commands behind the `enkf-lab` binary.
//!
//! ```
//! use enkf_lab::kalman::{analyze, GaussianState, ObservationModel};
//! use enkf_lab::linalg::{Matrix, Vector};
//!
//! let prior = GaussianState::new(Vector::from_slice(&[1.0])?, Matrix::diag(&[1.0]))?;
//! let obs = ObservationModel::new(Matrix::diag(&[1.0]), Matrix::diag(&[1.0]))?;
//! let post = analyze(&prior, &Vector::from_slice(&[2.0])?, &obs)?;
//! assert_eq!(post.state.mean()[0], 1.5);
//! # Ok::<(), enkf_lab::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod dynamics;
pub mod enkf;
mod error;
pub mod experiments;
pub mod kalman;
pub mod linalg;
pub mod randomness;
pub mod svg;

pub use error::{Error, Result};
