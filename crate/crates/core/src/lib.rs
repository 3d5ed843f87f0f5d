//! Numerical checks for pointwise Yang-Mills gap thresholds on model
//! four-manifolds.
//!
//! The crate is organised bottom-up:
//!
//! - [`lie`]: so(n) with the alpha-scaled inner product, the commutator
//!   constant and the gap constant `a_G`.
//! - [`forms`]: algebra-valued two-forms on oriented R^4, the Hodge star, the
//!   self-dual projection and the cubic-term estimate.
//! - [`geometry`]: the model-space catalog and a finite-difference curvature
//!   kernel with the Weyl splitting into `W+` and `W-`.
//! - [`weights`]: radial weights for weighted Poincare inequalities, cutoff
//!   families and a radial quadrature verifier.
//! - [`gauge`]: connections, the one-instanton, Yang-Mills residuals, charge
//!   and the refined Kato ratio.
//! - [`gap`]: threshold formulas, gap verdicts and the pointwise differential
//!   inequality for `|F+|`.
//! - [`cli`]: the `gapcheck` command-line front end.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eigen;
pub mod error;
pub mod forms;
pub mod gap;
pub mod gauge;
pub mod geometry;
pub mod lie;
pub mod quadrature;
pub mod radial;
pub mod weights;

pub use error::{Error, Result};
