//! Expected test counts: exact enumeration for small designs, seeded Monte
//! Carlo for everything else.
//!
//! Trial `t` always draws from `stream(seed, t)` and per-trial counts are
//! reduced as integers, so an estimate depends only on its inputs and never on
//! the number of threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{bound_b, AnalyticContext};
use crate::decode::Decoder;
use crate::design::{Family, PoolDesign};
use crate::designs::{bernoulli_indices, DesignParams};
use crate::error::{Error, Result};
use crate::rng::{split_seed, stream};
use crate::scalar::Scalar;

/// Largest `N` accepted by the enumerating estimators.
pub const MAX_EXHAUSTIVE_N: usize = 24;
const CHUNK: u64 = 256;

/// Mean of `T = M + |U0| + |U1|` with its breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub mean: T,
    /// Zero for exact results.
    pub std_error: T,
    pub n_trials: u64,
    pub exact: bool,
    pub seed: u64,
    pub mean_u0: T,
    pub mean_u1: T,
    /// Mean number of first-stage tests.
    pub n_tests: T,
}

impl<T: Scalar> Estimate<T> {
    /// `mean / (N p |ln p|)`.
    pub fn ratio(&self, n: u64, ctx: &AnalyticContext<T>) -> T {
        self.mean / ctx.scale(n)
    }
}

/// Exact `E[T]`, `E|U0|` and `E|U1|` under the product measure, by running the
/// decoder on all `2^N` assignments as bitmasks.
pub fn exhaustive_expected_tests<T: Scalar>(
    design: &PoolDesign,
    ctx: &AnalyticContext<T>,
) -> Result<Estimate<T>> {
    let n = design.n_variables();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_EXHAUSTIVE_N,
        });
    }
    let masks: Vec<u32> = design
        .pools()
        .iter()
        .map(|pool| pool.iter().fold(0u32, |m, &i| m | (1 << i)))
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let total = 1u64 << n;

    // (sum |U0|, sum |U1|) per number of defectives
    let sums = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(0u64, 0u64); n + 1];
            for x in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let x = x as u32;
                let mut sure0 = 0u32;
                for &m in &masks {
                    if m & x == 0 {
                        sure0 |= m;
                    }
                }
                let mut sure1 = 0u32;
                for &m in &masks {
                    let rest = m & !sure0;
                    if m & x != 0 && rest.count_ones() == 1 {
                        sure1 |= rest;
                    }
                }
                let k = x.count_ones() as usize;
                acc[k].0 += u64::from((!x & !sure0 & full).count_ones());
                acc[k].1 += u64::from((x & !sure1).count_ones());
            }
            acc
        })
        .reduce(
            || vec![(0u64, 0u64); n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            },
        );

    let (ln_p, ln_q) = (ctx.p().ln(), ctx.ln_q());
    let mut mean_u0 = T::zero();
    let mut mean_u1 = T::zero();
    for (k, &(s0, s1)) in sums.iter().enumerate() {
        let w = (T::from_count(k as u64) * ln_p + T::from_count((n - k) as u64) * ln_q).exp();
        mean_u0 = mean_u0 + w * T::from_count(s0);
        mean_u1 = mean_u1 + w * T::from_count(s1);
    }
    let m = T::from_count(design.n_tests() as u64);
    Ok(Estimate {
        mean: m + mean_u0 + mean_u1,
        std_error: T::zero(),
        n_trials: total,
        exact: true,
        seed: 0,
        mean_u0,
        mean_u1,
        n_tests: m,
    })
}

/// Exact `E|U0| - B`; non-negative for every design and zero without 4-cycles.
pub fn fkg_gap<T: Scalar>(design: &PoolDesign, ctx: &AnalyticContext<T>) -> Result<T> {
    Ok(exhaustive_expected_tests(design, ctx)?.mean_u0 - bound_b(design, ctx))
}

/// Integer sums over a block of trials.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    u0: u64,
    u1: u64,
    sq: u128,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally {
            u0: self.u0 + o.u0,
            u1: self.u1 + o.u1,
            sq: self.sq + o.sq,
        }
    }
}

/// Monte Carlo estimate of `E[T]` from `trials` independent assignments.
pub fn mc_expected_tests<T: Scalar>(
    design: &PoolDesign,
    ctx: &AnalyticContext<T>,
    trials: u64,
    seed: u64,
) -> Result<Estimate<T>> {
    if trials == 0 {
        return Err(Error::Param("trials must be at least 1".into()));
    }
    let n = design.n_variables();
    let p = ctx.p().as_f64();
    let tally = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut dec = Decoder::new(design);
            let mut t = Tally::default();
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let defectives = bernoulli_indices(n, p, &mut stream(seed, trial));
                let (u0, u1) = dec.count(&defectives);
                let u = (u0 + u1) as u128;
                t = t.add(Tally {
                    u0: u0 as u64,
                    u1: u1 as u64,
                    sq: u * u,
                });
            }
            t
        })
        .reduce(Tally::default, Tally::add);

    let nt = T::from_count(trials);
    let sum = tally.u0 as u128 + tally.u1 as u128;
    let std_error = if trials < 2 {
        T::zero()
    } else {
        // n * sum(u^2) - (sum u)^2 is exact in integers
        let num = trials as u128 * tally.sq - sum * sum;
        let var = T::lit(num as f64) / (nt * T::from_count(trials - 1));
        (var / nt).sqrt()
    };
    let mean_u0 = T::from_count(tally.u0) / nt;
    let mean_u1 = T::from_count(tally.u1) / nt;
    let m = T::from_count(design.n_tests() as u64);
    Ok(Estimate {
        mean: m + mean_u0 + mean_u1,
        std_error,
        n_trials: trials,
        exact: false,
        seed,
        mean_u0,
        mean_u1,
        n_tests: m,
    })
}

/// Seeds of design sample `s` in a family estimate: `(design seed, trial seed)`.
pub fn family_seeds(seed: u64, sample: u64) -> (u64, u64) {
    (
        split_seed(seed, 2 * sample),
        split_seed(seed, 2 * sample + 1),
    )
}

/// Two-level estimate: the mean of `T` over random designs drawn from
/// `params`, each evaluated by [`mc_expected_tests`].
///
/// With two or more designs the standard error is the spread of the
/// per-design means over `sqrt(S)`, which by the law of total variance covers
/// both levels of sampling; with one design it is that design's error.
pub fn mc_family_expected_tests<T: Scalar>(
    params: &DesignParams,
    ctx: &AnalyticContext<T>,
    design_samples: u64,
    trials_per_design: u64,
    seed: u64,
) -> Result<Estimate<T>> {
    if design_samples == 0 || trials_per_design == 0 {
        return Err(Error::Param(
            "design_samples and trials must be at least 1".into(),
        ));
    }
    if params.family == Family::Custom {
        return Err(Error::Param("custom designs cannot be sampled".into()));
    }
    let per_design: Vec<Estimate<T>> = (0..design_samples)
        .into_par_iter()
        .map(|s| {
            let (design_seed, trial_seed) = family_seeds(seed, s);
            let design = params.clone().with_seed(design_seed).generate()?;
            mc_expected_tests(&design, ctx, trials_per_design, trial_seed)
        })
        .collect::<Result<_>>()?;

    let sn = T::from_count(design_samples);
    let avg = |f: fn(&Estimate<T>) -> T| per_design.iter().map(f).sum::<T>() / sn;
    let mean = avg(|e| e.mean);
    let std_error = if design_samples == 1 {
        per_design[0].std_error
    } else {
        let ss: T = per_design
            .iter()
            .map(|e| (e.mean - mean) * (e.mean - mean))
            .sum();
        (ss / (sn - T::one()) / sn).sqrt()
    };
    Ok(Estimate {
        mean,
        std_error,
        n_trials: design_samples * trials_per_design,
        exact: false,
        seed,
        mean_u0: avg(|e| e.mean_u0),
        mean_u1: avg(|e| e.mean_u1),
        n_tests: avg(|e| e.n_tests),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::gen_poisson_poisson;

    fn ctx(p: f64) -> AnalyticContext<f64> {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn single_pool_pair() {
        let d = PoolDesign::from_pools(2, &[&[0, 1]]).unwrap();
        let e = exhaustive_expected_tests(&d, &ctx(0.5)).unwrap();
        assert!((e.mean_u0 - 0.5).abs() < 1e-15);
        // a lone defective is never certified: its partner has no negative test
        assert!((e.mean_u1 - 1.0).abs() < 1e-15);
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!(e.exact && e.std_error == 0.0);
    }

    #[test]
    fn path_matches_b() {
        let d = PoolDesign::from_pools(3, &[&[0, 1], &[1, 2]]).unwrap();
        let e = exhaustive_expected_tests(&d, &ctx(0.5)).unwrap();
        assert!((e.mean_u0 - 0.625).abs() < 1e-15);
        assert!(fkg_gap(&d, &ctx(0.5)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn doubled_pool_gap() {
        let d = PoolDesign::from_pools(2, &[&[0, 1], &[0, 1]]).unwrap();
        assert!((fkg_gap(&d, &ctx(0.5)).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn small_p_mean_tends_to_m() {
        let d = PoolDesign::from_pools(4, &[&[0, 1], &[2, 3], &[0, 2]]).unwrap();
        let e = exhaustive_expected_tests(&d, &ctx(1e-9)).unwrap();
        assert!((e.mean - 3.0).abs() < 1e-7);
    }

    #[test]
    fn too_large() {
        let d = PoolDesign::from_pools(25, &[&[0]]).unwrap();
        assert!(matches!(
            exhaustive_expected_tests(&d, &ctx(0.1)),
            Err(Error::TooLarge { n: 25, max: 24 })
        ));
    }

    #[test]
    fn mc_is_deterministic_and_matches_enumeration() {
        let d = gen_poisson_poisson(12, 6, 2.0, 5).unwrap();
        let c = ctx(0.2);
        let a = mc_expected_tests(&d, &c, 20_000, 9).unwrap();
        let b = mc_expected_tests(&d, &c, 20_000, 9).unwrap();
        assert_eq!(a, b);
        let ex = exhaustive_expected_tests(&d, &c).unwrap();
        assert!((a.mean - ex.mean).abs() < 4.0 * a.std_error, "{a:?} {ex:?}");
        let one = mc_expected_tests(&d, &c, 1, 3).unwrap();
        assert_eq!(one.std_error, 0.0);
        assert!(mc_expected_tests(&d, &c, 0, 3).is_err());
    }

    #[test]
    fn single_design_family_reduces_to_design_estimate() {
        let params = DesignParams::new(Family::PoissonPoisson, 30, 0.1, 3, 10, 0).unwrap();
        let c = ctx(0.1);
        let fam = mc_family_expected_tests(&params, &c, 1, 500, 77).unwrap();
        let (ds, ts) = family_seeds(77, 0);
        let d = params.clone().with_seed(ds).generate().unwrap();
        let direct = mc_expected_tests(&d, &c, 500, ts).unwrap();
        assert_eq!(fam.mean, direct.mean);
        assert_eq!(fam.std_error, direct.std_error);
    }
}
