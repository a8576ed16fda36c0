//! Sparse linear-regression recovery: AMP with automatic SURE-based threshold
//! tuning, a state-evolution oracle, and a LASSO reference solver.
//!
//! Module map:
//! - [`problem_gen`]: seeded instance generation (y = X beta_o + w).
//! - [`shrinkage`]: soft-threshold kernels and closed-form Bayes risk.
//! - [`state_evolution`]: the asymptotic sigma^t recursion, chi <-> lambda
//!   calibration, greedy threshold sequences, maximin baseline.
//! - [`amp`]: finite-p AMP iterations with the Onsager correction.
//! - [`sure`]: SURE risk estimate + modified bisection tuner.
//! - [`lasso`]: coordinate-descent LASSO with KKT certificates.
//! - [`experiment`]: named experiment presets and the CSV/manifest harness.

pub mod amp;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod lasso;
pub mod prior;
pub mod problem_gen;
pub mod quadrature;
pub mod shrinkage;
pub mod state_evolution;
pub mod sure;

pub use error::{Error, Result};
