//! Side-slip angle estimation for road vehicles.
//!
//! This crate holds the allocation-only algorithmic core: single-track
//! vehicle models and tire curves, a synthetic 50 Hz driving-data generator,
//! a two-stage multilayer perceptron trained with Adam, the hybrid
//! kinematic + network observer, an extended Kalman filter baseline and the
//! error metrics used to compare them. Everything is `no_std` with `alloc`;
//! file formats and the command line live in the `sideslip` crate.

#![no_std]
// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ekf;
pub mod error;
pub mod eval;
pub mod hybrid;
pub mod mlp;
pub mod seed;
pub mod simulator;
pub mod vehicle;

pub use error::{Error, Result};

/// Gravitational acceleration used for every `g`-normalised quantity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Speed below which slip angles and the side-slip angle are undefined (m/s).
pub const V_MIN: f64 = 1.0;

/// Sample period of every sensor and reference stream (50 Hz).
pub const SAMPLE_PERIOD: f64 = 0.02;
