//! File formats, evaluation reports and the end-to-end pipeline around
//! [`sideslip_core`].
//!
//! * [`dataio`] reads and writes trajectory CSV logs and model files.
//! * [`pipeline`] generates datasets, trains the hybrid observer and
//!   evaluates observers against ground truth.
//! * [`report`] renders MAE tables and plot-ready CSV series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod error;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
