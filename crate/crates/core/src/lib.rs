//! Computational laboratory for multiple ergodic averages along random
//! sparse sequences.
//!
//! The crate is organised around five pieces:
//!
//! * [`seqgen`] draws the independent selection bits `X_n` with
//!   `P(X_n = 1) = n^{-a}` and enumerates the sparse sequence `a_n`.
//! * [`systems`] provides concrete measure preserving systems: commuting
//!   circle rotations, finite cyclic pairs used as exact oracles, and the
//!   cylinder algebra of the two sided Bernoulli shift.
//! * [`averages`] computes the ergodic averages along `n` and `a_n`, their
//!   limits, recurrence series and the associated inequalities.
//! * [`estimates`] certifies the quantitative estimates (van der Corput,
//!   random trigonometric polynomials, summability of tails, strong law and
//!   Borel-Cantelli diagnostics).
//! * [`counterexample`] builds the permutation that makes a pair of
//!   Bernoulli shifts non-recurrent and non-convergent.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averages;
pub mod constants;
pub mod counterexample;
mod error;
pub mod estimates;
pub mod numeric;
pub mod seqgen;
pub mod systems;

pub use error::{Error, Result};
