use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::bounds::{a_coeff, a_coeff_real};
use super::optimize::grid_then_golden;
use super::AnalyticContext;

/// Sparse non-negative integer vector indexed from 1: `m_i` is the number of
/// tests of size `i` a variable belongs to, normalised per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MVector {
    entries: BTreeMap<u64, u64>,
}

impl MVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// `m * e_i`.
    pub fn single(i: u64, m: u64) -> Result<Self> {
        let mut v = Self::new();
        v.set(i, m)?;
        Ok(v)
    }

    pub fn set(&mut self, i: u64, m: u64) -> Result<()> {
        if i == 0 {
            return Err(Error::Param("m-vector indices start at 1".into()));
        }
        if m == 0 {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, m);
        }
        Ok(())
    }

    pub fn get(&self, i: u64) -> u64 {
        self.entries.get(&i).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&i, &m)| (i, m))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }
}

/// `A_p(m) = sum_i m_i / i + q * [m_1 = 0] * exp(-sum_{i>=2} m_i a_p^i)`.
///
/// `n` bounds the admissible indices.
pub fn a_p_eval<T: Scalar>(m: &MVector, ctx: &AnalyticContext<T>, n: u64) -> Result<T> {
    if let Some(top) = m.max_index() {
        if top > n {
            return Err(Error::Param(format!(
                "m-vector index {top} exceeds N = {n}"
            )));
        }
    }
    let mut tests = T::zero();
    let mut exponent = T::zero();
    for (i, mi) in m.iter() {
        tests = tests + T::from_count(mi) / T::from_count(i);
        if i >= 2 {
            exponent = exponent + T::from_count(mi) * a_coeff(i, ctx)?;
        }
    }
    let survive = if m.get(1) > 0 {
        T::zero()
    } else {
        ctx.q() * (-exponent).exp()
    };
    Ok(tests + survive)
}

/// Minimiser of `A_p` over a candidate family.
#[derive(Debug, Clone, PartialEq)]
pub struct AbarMin<T> {
    pub value: T,
    pub argmin: MVector,
}

/// Minimum of `A_p` over the zero vector and the single-support vectors
/// `m e_i`, `1 <= i <= n`, `1 <= m <= m_max`.
///
/// The zero vector (value `q`) has to be a candidate: for `p` close to 1 it is
/// the global minimiser over the whole lattice.
pub fn a_bar_restricted<T: Scalar>(
    ctx: &AnalyticContext<T>,
    n: u64,
    m_max: u64,
) -> Result<AbarMin<T>> {
    if n == 0 || m_max == 0 {
        return Err(Error::Param(
            "restricted minimum needs n >= 1 and m_max >= 1".into(),
        ));
    }
    let mut best = (ctx.q(), 0u64, 0u64);
    if T::one() < best.0 {
        best = (T::one(), 1, 1);
    }
    for i in 2..=n {
        let a = a_coeff::<T>(i, ctx)?;
        let inv_i = T::from_count(i).recip();
        for m in 1..=m_max {
            let mf = T::from_count(m);
            let v = mf * inv_i + ctx.q() * (-mf * a).exp();
            if v < best.0 {
                best = (v, i, m);
            }
        }
    }
    let argmin = if best.1 == 0 {
        MVector::new()
    } else {
        MVector::single(best.1, best.2)?
    };
    Ok(AbarMin {
        value: best.0,
        argmin,
    })
}

/// `U(p) = min_{r >= 2} 1 / (r a_p^r)` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UMin<T> {
    pub value: T,
    pub argmin: T,
}

const U_GRID_POINTS: usize = 4096;

/// `U(p)` over `r` in `[2, r_max]` with the default `r_max = max(8 ln2 / p, 16)`.
///
/// The minimiser sits near `ln 2 / p`, so the default bracket contains it with
/// a wide margin.
pub fn u_of_p<T: Scalar>(ctx: &AnalyticContext<T>) -> UMin<T> {
    let r_max = (T::lit(8.0) * T::LN_2() / ctx.p()).max(T::lit(16.0));
    u_of_p_with(ctx, r_max, U_GRID_POINTS)
}

pub fn u_of_p_with<T: Scalar>(ctx: &AnalyticContext<T>, r_max: T, grid_points: usize) -> UMin<T> {
    // r a_p^r underflows to zero once (1-p)^(r-1) is below machine epsilon
    let f = |r: T| {
        let d = r * a_coeff_real(r, ctx);
        if d > T::zero() {
            d.recip()
        } else {
            T::infinity()
        }
    };
    let (argmin, value) =
        grid_then_golden(f, T::lit(2.0), r_max, grid_points, true, ctx.precision());
    UMin { value, argmin }
}

/// `c(p)` together with the `U(p)` it was built from and the minimising `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMin<T> {
    pub value: T,
    pub w: T,
    pub u: UMin<T>,
}

/// `c(p) = min_{w >= 0} [U(p) w + q exp(-w)]`.
///
/// For `q > U` the minimum is interior at `w* = ln(q/U)` with value
/// `U (1 + w*)`; otherwise it is `q` at `w = 0`.
pub fn c_of_p<T: Scalar>(ctx: &AnalyticContext<T>) -> CMin<T> {
    let u = u_of_p(ctx);
    let q = ctx.q();
    if q > u.value {
        let log_ratio = (q / u.value).ln();
        CMin {
            value: u.value * (T::one() + log_ratio),
            w: log_ratio,
            u,
        }
    } else {
        CMin {
            value: q,
            w: T::zero(),
            u,
        }
    }
}

/// Lower bounds on the expected total number of tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBounds<T> {
    /// `N min(1, c(p))`.
    pub variational: T,
    /// `N p |log2 p|`.
    pub info_theoretic: T,
}

impl<T: Scalar> LowerBounds<T> {
    pub fn max(&self) -> T {
        self.variational.max(self.info_theoretic)
    }
}

pub fn lower_bound_t<T: Scalar>(n: u64, ctx: &AnalyticContext<T>) -> LowerBounds<T> {
    let nf = T::from_count(n);
    let c = c_of_p(ctx).value;
    LowerBounds {
        variational: nf * c.min(T::one()),
        info_theoretic: nf * ctx.p() * ctx.abs_ln_p() / T::LN_2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: f64) -> AnalyticContext<f64> {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn a_p_hand_values() {
        let c = ctx(0.5);
        assert_eq!(a_p_eval(&MVector::new(), &c, 4).unwrap(), 0.5);
        assert_eq!(
            a_p_eval(&MVector::single(1, 1).unwrap(), &c, 4).unwrap(),
            1.0
        );
        // one test of size 2: 1/2 + 1/2 * exp(-ln 2)
        let v = a_p_eval(&MVector::single(2, 1).unwrap(), &c, 4).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        let mut m = MVector::new();
        m.set(1, 1).unwrap();
        m.set(3, 2).unwrap();
        assert!((a_p_eval(&m, &c, 4).unwrap() - (1.0 + 2.0 / 3.0)).abs() < 1e-15);
        assert!(a_p_eval(&MVector::single(5, 1).unwrap(), &c, 4).is_err());
        assert!(MVector::single(0, 1).is_err());
    }

    #[test]
    fn restricted_minimum_prefers_zero_vector_for_large_p() {
        let r = a_bar_restricted(&ctx(0.9), 6, 6).unwrap();
        assert!(r.argmin.is_zero());
        assert!((r.value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn restricted_minimum_small_p_is_interior() {
        let r = a_bar_restricted(&ctx(0.05), 64, 16).unwrap();
        let (i, m) = r.argmin.iter().next().unwrap();
        assert!(i >= 2 && m >= 1);
        assert!(r.value < 0.95);
        assert!((a_p_eval(&r.argmin, &ctx(0.05), 64).unwrap() - r.value).abs() < 1e-15);
    }

    #[test]
    fn u_and_c_at_one_tenth() {
        let c = c_of_p(&ctx(0.1));
        assert!(
            (c.u.value - 0.186_593_906_713_177_4).abs() < 1e-9,
            "{}",
            c.u.value
        );
        assert!((c.u.argmin - 5.740_178_06).abs() < 1e-3, "{}", c.u.argmin);
        assert!(
            (c.value - 0.480_191_979_374_018_9).abs() < 1e-9,
            "{}",
            c.value
        );
        assert!((c.w - (0.9 / c.u.value).ln()).abs() < 1e-15);
        // the closed form agrees with a direct minimisation over w
        let g = |w: f64| c.u.value * w + 0.9 * (-w).exp();
        let (_, v) = crate::analytics::optimize::grid_then_golden(g, 0.0, 20.0, 200, false, 1e-12);
        assert!((v - c.value).abs() < 1e-12);
    }

    #[test]
    fn c_saturates_at_q_for_large_p() {
        let c = c_of_p(&ctx(0.95));
        assert!(
            (c.u.value - 1.0 / (2.0 * 0.95f64.ln().abs())).abs() < 1e-12,
            "{:?}",
            c.u
        );
        assert_eq!(c.value, 1.0 - 0.95);
        assert_eq!(c.w, 0.0);
    }

    #[test]
    fn lower_bounds() {
        let b = lower_bound_t(1000, &ctx(0.5));
        assert!((b.info_theoretic - 500.0).abs() < 1e-9);
        assert!(b.variational <= 1000.0);
        assert_eq!(b.max(), b.variational.max(b.info_theoretic));
    }
}
