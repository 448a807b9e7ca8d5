//! Switched vector-field path following for a fixed-wing vehicle in wind,
//! with baseline guidance laws, a closed-loop simulator and a Monte Carlo
//! comparison harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod guidance;
pub mod path;
pub mod sim;
pub mod vehicle;

pub use error::{Error, Result};
