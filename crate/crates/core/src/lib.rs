//! k-th nearest-neighbour estimation of Shannon differential entropy and an
//! entropy-based goodness-of-fit test for generalized Gaussian distributions.
//!
//! The estimator is
//! `Ĥ_{N,k} = (1/N) Σ ln[ρ_k^m(X_i) V_m (N-1) e^{-ψ(k)}]`, where `ρ_k` is the
//! distance to the k-th nearest neighbour. Among densities on `ℝ^m` with a
//! fixed `E‖X‖^s`, the generalized Gaussian `GG_τ(m, s)` has the largest
//! entropy; [`gof`] turns that into a test of `X ~ GG(m, s)`.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod gof;
pub mod neighbors;
pub mod normality;
pub mod quadrature;
pub mod specfun;

pub use distributions::{GGParams, MEPParams, RandomStream, STParams};
pub use entropy::{knn_entropy, knn_entropy_k1, EntropyEstimate};
pub use error::{Error, Result};
pub use gof::{critical_values, run_test, test_statistic, CriticalSource, CriticalValueTable, Tail, TestOutcome};
pub use neighbors::{NeighborDistances, Sample};

/// Library version recorded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
