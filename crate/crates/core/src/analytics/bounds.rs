use crate::design::PoolDesign;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::AnalyticContext;

/// `B = q * sum_i prod_{a ∋ i} (1 - q^(d_a - 1))`, the product-form estimate of
/// the expected number of undetermined zeros.
///
/// A lower bound on `E|U0|` for every design and exact when the design has no
/// 4-cycles. Members of a singleton test contribute nothing; isolated
/// variables contribute `q`.
pub fn bound_b<T: Scalar>(design: &PoolDesign, ctx: &AnalyticContext<T>) -> T {
    let log_factor: Vec<T> = design
        .pools()
        .iter()
        .map(|pool| ctx.ln_one_minus_q_pow(T::from_count(pool.len().saturating_sub(1) as u64)))
        .collect();
    let total: T = (0..design.n_variables())
        .map(|i| {
            let s: T = design
                .tests_of(i)
                .iter()
                .map(|&a| log_factor[a as usize])
                .sum();
            s.exp()
        })
        .sum();
    ctx.q() * total
}

/// `a_p^i = |ln(1 - (1-p)^(i-1))|` for integer `i >= 2`.
pub fn a_coeff<T: Scalar>(i: u64, ctx: &AnalyticContext<T>) -> Result<T> {
    if i < 2 {
        return Err(Error::Param(format!("a_p^i needs i >= 2, got {i}")));
    }
    Ok(a_coeff_real(T::from_count(i), ctx))
}

/// `a_p^r` for real `r > 1`.
pub fn a_coeff_real<T: Scalar>(r: T, ctx: &AnalyticContext<T>) -> T {
    -ctx.ln_one_minus_q_pow(r - T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: f64) -> AnalyticContext<f64> {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn path_design_half() {
        let d = PoolDesign::from_pools(3, &[&[0, 1], &[1, 2]]).unwrap();
        let b = bound_b(&d, &ctx(0.5));
        assert!((b - 0.625).abs() < 1e-15);
        let b32 = bound_b(&d, &AnalyticContext::new(0.5f32).unwrap());
        assert!((b32 - 0.625).abs() < 1e-6);
    }

    #[test]
    fn singleton_tests_kill_their_members() {
        let d = PoolDesign::from_pools(3, &[&[0], &[0, 1, 2]]).unwrap();
        let c = ctx(0.3);
        let per = 1.0 - 0.7f64.powi(2);
        assert!((bound_b(&d, &c) - 0.7 * 2.0 * per).abs() < 1e-15);
    }

    #[test]
    fn isolated_variables_contribute_q() {
        let d = PoolDesign::from_pools(2, &[&[0]]).unwrap();
        assert!((bound_b(&d, &ctx(0.2)) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn a_coefficients() {
        assert!((a_coeff(2, &ctx(0.5)).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(a_coeff(1, &ctx(0.5)).is_err());
        let c = ctx(0.1);
        let mut prev = f64::INFINITY;
        for i in 2..200 {
            let a = a_coeff(i, &c).unwrap();
            assert!(a > 0.0 && a < prev);
            prev = a;
        }
        assert!(a_coeff(2, &ctx(1.0 - 1e-12)).unwrap() < 1e-11);
    }
}
