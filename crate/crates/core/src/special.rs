//! Binomial probabilities that stay accurate for `n` in the billions.
//!
//! Uses Loader's saddle-point form: the log-pmf is assembled from the Stirling
//! remainder of each factorial and the deviance term `bd0`, which avoids the
//! catastrophic cancellation of `lgamma(n) - lgamma(k) - lgamma(n - k)`.

use crate::scalar::Scalar;

/// `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]` for integer `n >= 1`.
pub fn stirlerr<T: Scalar>(n: u64) -> T {
    let nf = T::from_count(n);
    let half_ln_2pi = T::lit(0.918_938_533_204_672_8);
    if n <= 15 {
        let ln_fact: T = (2..=n).map(|k| T::from_count(k).ln()).sum();
        return ln_fact - ((nf + T::lit(0.5)) * nf.ln() - nf + half_ln_2pi);
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nn = nf * nf;
    (T::lit(S0) - (T::lit(S1) - (T::lit(S2) - (T::lit(S3) - T::lit(S4) / nn) / nn) / nn) / nn) / nf
}

/// Deviance `x ln(x / np) + np - x`, evaluated by series when `x` is close to `np`.
pub fn bd0<T: Scalar>(x: T, np: T) -> T {
    let diff = x - np;
    if diff.abs() < T::lit(0.1) * (x + np) {
        let mut v = diff / (x + np);
        let mut s = diff * v;
        let mut ej = T::lit(2.0) * x * v;
        v = v * v;
        for j in 1..1000u64 {
            ej = ej * v;
            let s1 = s + ej / T::from_count(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln [C(n, k) p^k (1-p)^(n-k)]` for `0 < p < 1`.
pub fn ln_binom_pmf<T: Scalar>(k: u64, n: u64, p: T) -> T {
    assert!(k <= n, "ln_binom_pmf: k = {k} > n = {n}");
    let nf = T::from_count(n);
    if k == 0 {
        return nf * (-p).ln_1p();
    }
    if k == n {
        return nf * p.ln();
    }
    let kf = T::from_count(k);
    let q = T::one() - p;
    let lc = stirlerr::<T>(n)
        - stirlerr::<T>(k)
        - stirlerr::<T>(n - k)
        - bd0(kf, nf * p)
        - bd0(nf - kf, nf * q);
    let lf = T::lit(std::f64::consts::TAU).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - T::lit(0.5) * lf
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn matches_high_precision_references() {
        let cases: [(u64, u64, f64, f64); 7] = [
            (1_000_000, 999_999_999, 1e-3, -7.826193645353434777),
            (999_000, 999_999_999, 1e-3, -8.326360145153343118),
            (3, 10, 0.25, -1.385165847740092354),
            (0, 10, 0.25, -2.876820724517809274),
            (10, 10, 0.25, -13.86294361119890619),
            (50, 200, 0.3, -3.965767415897898898),
            (17, 40, 0.9, -29.54169520818996488),
        ];
        for (k, n, p, want) in cases {
            let got: f64 = ln_binom_pmf(k, n, p);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "{k} {n} {p}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn small_n_matches_direct_products() {
        for n in 1..40u64 {
            for k in 0..=n {
                let p = 0.37f64;
                let direct: f64 = (1..=k)
                    .map(|j| ((n - k + j) as f64 / j as f64).ln())
                    .sum::<f64>()
                    + k as f64 * p.ln()
                    + (n - k) as f64 * (1.0 - p).ln();
                let got: f64 = ln_binom_pmf(k, n, p);
                assert!((got - direct).abs() < 1e-11, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let got: f32 = ln_binom_pmf(3, 10, 0.25f32);
        assert!((got - (-1.385_165_8)).abs() < 1e-5);
    }
}
