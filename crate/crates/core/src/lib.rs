//! Two-stage probabilistic group testing over sparse pool designs.
//!
//! A first stage runs `M` pooled tests laid out by a bipartite graph between
//! `N` items and `M` tests; the second stage individually retests every item
//! the first stage left undetermined. This crate provides
//!
//! * the design type and its graph queries ([`design`]), file formats ([`io`]);
//! * generators for regular-regular girth-6, regular-Poisson and
//!   Poisson-Poisson designs plus the optimal parameter rules ([`designs`]);
//! * the sure-zero / sure-one decoder ([`decode`]);
//! * closed-form bounds and the scalar optimisations behind them ([`analytics`]);
//! * exhaustive and Monte Carlo estimators of the expected test count ([`simulate`]).
//!
//! The analytic layer is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the CLI and tests use.

// `!(x > 0.0)` is used on purpose so NaN falls into the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod assignment;
pub mod decode;
pub mod design;
pub mod designs;
mod error;
pub mod io;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use assignment::{Assignment, DecodeResult, TestOutcomes};
pub use design::{CycleCensus, DegreeProfile, Family, PoolDesign, Provenance};
pub use designs::DesignParams;
pub use error::{Error, Feasibility, Result};
pub use scalar::Scalar;

/// Analytic context in double precision.
pub type Context = analytics::AnalyticContext<f64>;
/// Analytic context in single precision.
pub type Context32 = analytics::AnalyticContext<f32>;
/// Expected-test-count estimate in double precision.
pub type Estimate = simulate::Estimate<f64>;
/// Poisson-Poisson optimum in double precision.
pub type PpOptimum = analytics::PpOptimum<f64>;
