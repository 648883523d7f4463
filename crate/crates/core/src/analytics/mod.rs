//! Closed-form quantities, bounds and the scalar optimisations behind them.
//!
//! Every function is a pure function of its inputs and generic over
//! [`Scalar`]. Powers `(1-p)^k` and factors `1 - (1-p)^k` go through
//! `ln_1p`/`exp_m1` so nothing cancels when `p` is small.

mod bounds;
pub mod optimize;
mod poisson;
mod regular;
mod variational;

pub use bounds::{a_coeff, a_coeff_real, bound_b};
pub use poisson::{pp_expected_u0, pp_optimize, BinomialWeights, PpEvaluator, PpOptimum};
pub use regular::{
    h_correction, r_p_eval, regular_upper_bound, HCorrection, RegularUpperBound, H_WINDOW_UPPER,
};
pub use variational::{
    a_bar_restricted, a_p_eval, c_of_p, lower_bound_t, u_of_p, u_of_p_with, AbarMin, CMin,
    LowerBounds, MVector, UMin,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative tolerance of the scalar minimisations.
pub const DEFAULT_PRECISION: f64 = 1e-12;

/// Defect probability `p` together with `q = 1 - p` and the tolerance used by
/// the scalar minimisations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticContext<T> {
    p: T,
    q: T,
    precision: T,
}

impl<T: Scalar> AnalyticContext<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::Param(format!("p = {p} is not in (0, 1)")));
        }
        Ok(AnalyticContext {
            p,
            q: T::one() - p,
            precision: T::lit(DEFAULT_PRECISION),
        })
    }

    pub fn with_precision(mut self, precision: T) -> Self {
        self.precision = precision;
        self
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn precision(&self) -> T {
        self.precision
    }

    /// `ln(1 - p)`.
    pub fn ln_q(&self) -> T {
        (-self.p).ln_1p()
    }

    /// `|ln p|`.
    pub fn abs_ln_p(&self) -> T {
        -self.p.ln()
    }

    /// `(1 - p)^k` for real `k >= 0`.
    pub fn q_pow(&self, k: T) -> T {
        if k == T::zero() {
            T::one()
        } else {
            (k * self.ln_q()).exp()
        }
    }

    /// `ln(1 - (1 - p)^k)`; `-inf` at `k = 0`.
    pub fn ln_one_minus_q_pow(&self, k: T) -> T {
        if k == T::zero() {
            T::neg_infinity()
        } else {
            (-(k * self.ln_q()).exp_m1()).ln()
        }
    }

    /// `N p |ln p|`, the scale every test count is reported against.
    pub fn scale(&self, n: u64) -> T {
        T::from_count(n) * self.p * self.abs_ln_p()
    }
}
