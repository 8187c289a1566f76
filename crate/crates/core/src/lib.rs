//! Signed-network opinion dynamics with communication delays.
//!
//! Builds signed interaction networks, simulates delayed discrete and
//! continuous opinion updates on them, and evaluates spectral predictions for
//! convergence, delay margins and Lambert-W convergence rates.

// `!(x <= y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuous;
pub mod delay;
pub mod discrete;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod lemmas;
pub mod matrix;
pub mod netgen;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::SignedWeightMatrix;
