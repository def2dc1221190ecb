//! Exact event-driven simulation of preemptive single-machine scheduling
//! where only `B` of the `n` job sizes come with (possibly wrong) predictions.
//!
//! The crate is organised bottom-up:
//!
//! - [`instances`]: job sizes, known subsets, noisy predictions, errors.
//! - [`engine`]: analytic event-driven execution of rate-based policies.
//! - [`policies`]: the algorithm catalog (OPT, round-robin, RTC, SPJF, CRRR,
//!   Switch and its randomized and preferential variants, mixtures).
//! - [`analysis`]: closed-form objectives, upper and lower bound formulas,
//!   and the quadrature pipeline behind the generic lower bound.
//! - [`harness`]: Monte Carlo and exact estimation of competitive ratios,
//!   experiment presets, CSV and SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod harness;
pub mod instances;
pub mod policies;
pub mod tol;

pub use error::{Error, Result};
