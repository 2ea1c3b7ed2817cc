//! Batch experiment runner for the `ergolab` library.
//!
//! [`config`] validates flags or a JSON file into an
//! [`config::ExperimentConfig`] that [`run`] executes. The `report` kind is
//! handled by [`report`], which evaluates every acceptance criterion.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod instances;
pub mod report;
pub mod run;
