//! Entropy of coordinatewise products of independent stationary processes.
//!
//! Given a stationary process `X` and an independent stationary `{0,1}`-valued
//! process `Y` with `theta = P(Y_0 = 1) > 0`, the product `M_i = X_i * Y_i`
//! reveals `X` exactly on the arrival set of `Y`. This crate computes exact
//! entropy rates where closed forms exist, certified bounds elsewhere, Monte
//! Carlo estimates with standard errors for the rest, and cross-validates all
//! of them against a brute-force block-entropy oracle and ergodic-theorem
//! self-checks.

pub mod config;
pub mod demos;
pub mod entropy;
pub mod error;
pub mod formulas;
pub mod mc;
pub mod models;
pub mod oracle;
pub mod presets;
pub mod report;
pub mod returns;
pub mod runner;

pub use error::{Error, Result};
