//! Transfer representation learning with a multi-output Takagi-Sugeno-Kang
//! fuzzy system.
//!
//! Source and target data are mapped through domain-specific fuzzy rule
//! antecedents into a shared fuzzy feature space. A linear projection (the
//! shared rule consequents) is then learned by a generalized eigenproblem that
//! trades off marginal and conditional mean discrepancy against target
//! variance and source class separability. Target pseudo-labels are refined by
//! a 1-nearest-neighbour classifier over a fixed number of iterations.
//!
//! Module map:
//!
//! - [`data`]: datasets, CSV ingestion, standardization, synthetic shifted pairs.
//! - [`varpart`]: deterministic divisive clustering and kernel widths.
//! - [`fuzzy`]: Gaussian memberships, rule firing and the fuzzy design matrix.
//! - [`objective`]: MMD coefficient matrices, scatter matrices, the matrix pencil.
//! - [`solver`]: symmetric-definite generalized eigensolver.
//! - [`pipeline`]: the adaptation loop, 1NN, PCA baseline, evaluation, model files.
//! - [`cli`]: the batch command-line front end.

pub mod cli;
pub mod data;
pub mod error;
pub mod fuzzy;
pub mod objective;
pub mod pipeline;
pub mod solver;
pub mod varpart;

pub use error::{Error, Result};

/// Dense column-major matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
