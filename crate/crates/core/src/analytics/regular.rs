use crate::design::Family;
use crate::designs::optimal_params;
use crate::error::Result;
use crate::scalar::Scalar;

use super::AnalyticContext;

/// Upper edge of the window expected for the correction `H(N, p)`.
pub const H_WINDOW_UPPER: f64 = 2.0;

/// `R_p = (1 - (1-p)^(K-1))^L`: probability that a fixed zero is undetermined
/// when each of its `L` tests has `K - 1` other members and no 4-cycles.
pub fn r_p_eval<T: Scalar>(ctx: &AnalyticContext<T>, k: T, l: T) -> T {
    (l * ctx.ln_one_minus_q_pow(k - T::one())).exp()
}

/// `M + Np + N q R_p` at the optimal regular parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularUpperBound<T> {
    pub value: T,
    pub tests_per_variable: u64,
    pub n_tests: u64,
    pub mean_test_degree: T,
    pub r_p: T,
}

impl<T: Scalar> RegularUpperBound<T> {
    /// `value / (N p |ln p|)`.
    pub fn ratio(&self, n: u64, ctx: &AnalyticContext<T>) -> T {
        self.value / ctx.scale(n)
    }
}

pub fn regular_upper_bound<T: Scalar>(
    n: u64,
    ctx: &AnalyticContext<T>,
) -> Result<RegularUpperBound<T>> {
    let params = optimal_params(n as usize, ctx.p().as_f64(), Family::RegularRegularGirth6)?;
    let l = params.tests_per_variable;
    let m = params.n_tests;
    let nf = T::from_count(n);
    let k = nf * T::from_count(l) / T::from_count(m);
    let r_p = r_p_eval(ctx, k, T::from_count(l));
    Ok(RegularUpperBound {
        value: T::from_count(m) + nf * ctx.p() + nf * ctx.q() * r_p,
        tests_per_variable: l,
        n_tests: m,
        mean_test_degree: k,
        r_p,
    })
}

/// `H(N, p) = (T - N p |ln p| / (ln 2)^2) / (N p)` and whether it lies in
/// `[(1 - 2|ln ln 2|) / (ln 2)^2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCorrection<T> {
    pub h: T,
    pub lower: T,
    pub upper: T,
    pub in_window: bool,
}

pub fn h_correction<T: Scalar>(n: u64, ctx: &AnalyticContext<T>, t_bar: T) -> HCorrection<T> {
    let ln2 = T::LN_2();
    let ln2_sq = ln2 * ln2;
    let np = T::from_count(n) * ctx.p();
    let h = (t_bar - np * ctx.abs_ln_p() / ln2_sq) / np;
    let lower = (T::one() - T::lit(2.0) * ln2.ln().abs()) / ln2_sq;
    let upper = T::lit(H_WINDOW_UPPER);
    HCorrection {
        h,
        lower,
        upper,
        in_window: h >= lower && h <= upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: f64) -> AnalyticContext<f64> {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn r_p_edge_cases() {
        let c = ctx(0.2);
        assert!((r_p_eval(&c, 5.0, 1.0) - (1.0 - 0.8f64.powi(4))).abs() < 1e-15);
        assert_eq!(r_p_eval(&c, 1.0, 3.0), 0.0);
        assert!((r_p_eval(&c, 4.0, 3.0) - (1.0 - 0.8f64.powi(3)).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn window_constants() {
        let h = h_correction(1000, &ctx(0.01), 0.0);
        assert!((h.lower - 0.555_672).abs() < 1e-6, "{}", h.lower);
        assert_eq!(h.upper, 2.0);
        let ln2 = std::f64::consts::LN_2;
        let c = ctx(0.01);
        let t = 1000.0 * 0.01 * c.abs_ln_p() / (ln2 * ln2);
        assert!(h_correction(1000, &c, t).h.abs() < 1e-12);
    }

    #[test]
    fn upper_bound_anchor() {
        let n = 1u64 << 20;
        let c = ctx(2f64.powi(-6));
        let b = regular_upper_bound(n, &c).unwrap();
        assert_eq!((b.tests_per_variable, b.n_tests), (6, 141_822));
        let ratio = b.ratio(n, &c);
        assert!(ratio > 2.0 && ratio < 3.2, "{ratio}");
    }
}
