use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::ln_binom_pmf;

use super::optimize::{golden_section, grid_then_golden};
use super::AnalyticContext;

/// Below this many trials the binomial law is summed over its whole support.
const EXACT_LIMIT: u64 = 10_000;
/// Probability mass allowed outside a truncated window.
const TAIL_MASS: f64 = 1e-16;
const K_GRID: usize = 40;
const M_GRID: usize = 32;

/// `Bin(n, p)` probabilities on a window `[start, start + len)` that carries
/// all but `omitted` of the mass.
///
/// The pmf ratio between neighbours is monotone, so beyond the point where it
/// drops below 1 each tail is bounded by a geometric series; the window is
/// widened until both bounds are below the tolerance.
#[derive(Debug, Clone)]
pub struct BinomialWeights<T> {
    start: u64,
    weights: Vec<T>,
    omitted: T,
}

impl<T: Scalar> BinomialWeights<T> {
    pub fn new(n: u64, p: T) -> Self {
        if n <= EXACT_LIMIT {
            let weights = (0..=n).map(|r| ln_binom_pmf(r, n, p).exp()).collect();
            return BinomialWeights {
                start: 0,
                weights,
                omitted: T::zero(),
            };
        }
        let q = T::one() - p;
        let tol = T::lit(TAIL_MASS);
        let nf = T::from_count(n);
        let mode = ((nf + T::one()) * p).floor().as_f64().min(n as f64) as u64;
        let pmf = |r: u64| ln_binom_pmf(r, n, p).exp();

        let mut hi = mode;
        let upper_tail = loop {
            if hi == n {
                break T::zero();
            }
            let w = pmf(hi);
            let rho = T::from_count(n - hi) / T::from_count(hi + 1) * p / q;
            if rho < T::one() && w * rho / (T::one() - rho) <= tol {
                break w * rho / (T::one() - rho);
            }
            hi += 1;
        };
        let mut lo = mode;
        let lower_tail = loop {
            if lo == 0 {
                break T::zero();
            }
            let w = pmf(lo);
            let rho = T::from_count(lo) / T::from_count(n - lo + 1) * q / p;
            if rho < T::one() && w * rho / (T::one() - rho) <= tol {
                break w * rho / (T::one() - rho);
            }
            lo -= 1;
        };
        BinomialWeights {
            start: lo,
            weights: (lo..=hi).map(pmf).collect(),
            omitted: upper_tail + lower_tail,
        }
    }

    /// First index of the window.
    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Upper bound on the mass outside the window.
    pub fn omitted(&self) -> T {
        self.omitted
    }

    /// `E[f(R)]` restricted to the window; for `0 <= f <= 1` the truncation
    /// error is at most [`omitted`](Self::omitted).
    pub fn expect(&self, f: impl Fn(u64) -> T) -> T {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, &w)| w * f(self.start + j as u64))
            .sum()
    }
}

/// Evaluates the Poisson-Poisson expected number of undetermined zeros for
/// many `(M, K)` pairs at fixed `(N, p)`, reusing the binomial weights.
#[derive(Debug, Clone)]
pub struct PpEvaluator<T> {
    n: u64,
    ctx: AnalyticContext<T>,
    weights: BinomialWeights<T>,
}

impl<T: Scalar> PpEvaluator<T> {
    pub fn new(n: u64, ctx: &AnalyticContext<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Param("N must be at least 1".into()));
        }
        Ok(PpEvaluator {
            n,
            ctx: *ctx,
            weights: BinomialWeights::new(n - 1, ctx.p()),
        })
    }

    pub fn weights(&self) -> &BinomialWeights<T> {
        &self.weights
    }

    /// `N q E[(1 - (K/N)(1 - K/N)^R)^M]` with `R ~ Bin(N - 1, p)`.
    pub fn u0(&self, m: u64, k: T) -> Result<T> {
        if m == 0 {
            return Err(Error::Param("M must be at least 1".into()));
        }
        let nf = T::from_count(self.n);
        if !(k > T::zero() && k <= nf) {
            return Err(Error::Param(format!(
                "K = {k} is not in (0, N = {})",
                self.n
            )));
        }
        Ok(self.u0_real(T::from_count(m), k))
    }

    fn u0_real(&self, m: T, k: T) -> T {
        let kappa = k / T::from_count(self.n);
        let ln_keep = (-kappa).ln_1p();
        let e = self.weights.expect(|r| {
            let clean = if r == 0 {
                T::one()
            } else {
                (T::from_count(r) * ln_keep).exp()
            };
            (m * (-kappa * clean).ln_1p()).exp()
        });
        T::from_count(self.n) * self.ctx.q() * e
    }

    /// `(M + E|U0| + Np) / (N p |ln p|)`.
    pub fn ratio(&self, m: u64, k: T) -> Result<T> {
        Ok(self.ratio_real(T::from_count(m), self.u0(m, k)?))
    }

    fn ratio_real(&self, m: T, u0: T) -> T {
        (m + u0 + T::from_count(self.n) * self.ctx.p()) / self.ctx.scale(self.n)
    }

    /// Best `K` for a (possibly fractional) number of tests.
    fn best_k(&self, m: T) -> (T, T) {
        let nf = T::from_count(self.n);
        let k0 = self.ctx.p().recip().min(nf);
        let hi = (k0 * T::lit(64.0)).min(nf);
        let lo = (k0 / T::lit(64.0)).min(hi / T::lit(2.0));
        let f = |ln_k: T| {
            let k = ln_k.exp().min(nf);
            self.ratio_real(m, self.u0_real(m, k))
        };
        let (ln_k, v) = grid_then_golden(f, lo.ln(), hi.ln(), K_GRID, false, self.ctx.precision());
        (ln_k.exp().min(nf), v)
    }
}

pub fn pp_expected_u0<T: Scalar>(n: u64, ctx: &AnalyticContext<T>, m: u64, k: T) -> Result<T> {
    PpEvaluator::new(n, ctx)?.u0(m, k)
}

/// Minimiser of the Poisson-Poisson test count over `(M, K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpOptimum<T> {
    pub m: u64,
    pub k: T,
    /// `(M + E|U0| + Np) / (N p |ln p|)` at the optimum.
    pub ratio: T,
    pub u0: T,
}

/// Minimises `(M + E|U0| + Np) / (N p |ln p|)` with `M` integer and `K` real.
///
/// The outer search treats `M` as continuous (log grid, then golden section)
/// and finishes with an integer scan around the continuous optimum; each outer
/// evaluation runs its own `K` search.
pub fn pp_optimize<T: Scalar>(n: u64, ctx: &AnalyticContext<T>) -> Result<PpOptimum<T>> {
    let scale = ctx.scale(n);
    if !(scale >= T::one()) {
        return Err(Error::DegenerateParams(format!(
            "N p |ln p| = {scale} < 1 at N = {n}, p = {}",
            ctx.p()
        )));
    }
    let eval = PpEvaluator::new(n, ctx)?;
    let m0 = T::E() * scale;
    let lo = (m0 / T::lit(64.0)).max(T::one());
    let hi = (m0 * T::lit(64.0)).max(lo * T::lit(4.0));
    let outer = |ln_m: T| eval.best_k(ln_m.exp()).1;
    let (ln_m, _) = grid_then_golden(outer, lo.ln(), hi.ln(), M_GRID, false, T::lit(1e-3));
    let m_est = ln_m.exp();
    // refine in linear M until the bracket is about one test wide
    let a = (m_est * T::lit(0.99)).max(T::one());
    let b = m_est * T::lit(1.01) + T::one();
    let (m_cont, _) = golden_section(|m| eval.best_k(m).1, a, b, T::lit(0.25) / b);

    let centre = m_cont.round().as_f64() as u64;
    let mut best: Option<PpOptimum<T>> = None;
    for m in centre.saturating_sub(2).max(1)..=centre + 2 {
        let (k, ratio) = eval.best_k(T::from_count(m));
        if best.is_none_or(|b| ratio < b.ratio) {
            best = Some(PpOptimum {
                m,
                k,
                ratio,
                u0: eval.u0_real(T::from_count(m), k),
            });
        }
    }
    Ok(best.expect("integer scan is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: f64) -> AnalyticContext<f64> {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn two_variable_hand_sum() {
        // N = 2, M = 1: r = 0 with prob q, r = 1 with prob p
        for &k in &[0.3, 1.0, 1.7, 2.0] {
            let p = 0.35;
            let q = 1.0 - p;
            let kap: f64 = k / 2.0;
            let want = 2.0 * q * (q * (1.0 - kap) + p * (1.0 - kap * (1.0 - kap)));
            let got = pp_expected_u0(2, &ctx(p), 1, k).unwrap();
            assert!((got - want).abs() < 1e-15, "{k}: {got} vs {want}");
        }
    }

    #[test]
    fn small_p_limit() {
        let got = pp_expected_u0(10, &ctx(1e-12), 3, 2.0).unwrap();
        assert!((got - 10.0 * 0.8f64.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        let c = ctx(0.1);
        assert!(pp_expected_u0(10, &c, 3, 11.0).is_err());
        assert!(pp_expected_u0(10, &c, 3, 0.0).is_err());
        assert!(pp_expected_u0(10, &c, 0, 1.0).is_err());
        assert!(pp_expected_u0(0, &c, 1, 1.0).is_err());
        assert!(matches!(
            pp_optimize(4, &c),
            Err(Error::DegenerateParams(_))
        ));
    }

    #[test]
    fn window_mass_is_certified() {
        let w = BinomialWeights::<f64>::new(1_000_000_000, 1e-3);
        let mass: f64 = w.weights().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12, "{mass}");
        assert!(w.omitted() <= 2e-16);
        assert!(w.weights().len() < 40_000);
        let exact = BinomialWeights::<f64>::new(5000, 0.01);
        assert_eq!(exact.start(), 0);
        assert_eq!(exact.weights().len(), 5001);
    }

    #[test]
    fn monotone_in_m_and_bracketed_in_k() {
        let c = ctx(0.01);
        let e = PpEvaluator::new(20_000, &c).unwrap();
        let mut prev = f64::INFINITY;
        for m in (100..2000).step_by(100) {
            let v = e.u0(m, 100.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let at = |k: f64| e.ratio(1500, k).unwrap();
        assert!(at(100.0) < at(10.0) && at(100.0) < at(2000.0));
    }

    #[test]
    fn optimum_is_near_e_at_moderate_scale() {
        let c = ctx(1e-3);
        let n = 10_000_000;
        let o = pp_optimize(n, &c).unwrap();
        assert!(o.ratio > std::f64::consts::E && o.ratio < 3.1, "{o:?}");
        let e = PpEvaluator::new(n, &c).unwrap();
        for dm in [-50i64, 50] {
            for fk in [0.97, 1.03] {
                let m = (o.m as i64 + dm) as u64;
                assert!(e.ratio(m, o.k * fk).unwrap() >= o.ratio);
            }
        }
    }
}
