//! Random design ensembles.

use rand::Rng as _;

use crate::design::{Family, PoolDesign, Provenance};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Regular-Poisson design: each variable joins a uniformly random `L`-subset
/// of the `M` tests, independently of the others.
///
/// Subsets come from a partial Fisher-Yates shuffle of a persistent
/// permutation whose swaps are undone after each variable, so each draw costs
/// `O(L)`.
pub fn gen_regular_poisson(
    n_variables: usize,
    n_tests: usize,
    tests_per_variable: usize,
    seed: u64,
) -> Result<PoolDesign> {
    let (n, m, l) = (n_variables, n_tests, tests_per_variable);
    if n == 0 || m == 0 {
        return Err(Error::Param("N and M must be at least 1".into()));
    }
    if l == 0 || l > m {
        return Err(Error::Param(format!(
            "need 1 <= L <= M, got L = {l}, M = {m}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<u32> = (0..m as u32).collect();
    let mut swaps = vec![0usize; l];
    let mut pools = vec![Vec::with_capacity(n * l / m + 1); m];
    for i in 0..n as u32 {
        for (k, s) in swaps.iter_mut().enumerate() {
            *s = rng.random_range(k..m);
            perm.swap(k, *s);
        }
        for &t in &perm[..l] {
            pools[t as usize].push(i);
        }
        for (k, &s) in swaps.iter().enumerate().rev() {
            perm.swap(k, s);
        }
    }
    PoolDesign::new(
        n,
        pools,
        Provenance {
            family: Family::RegularPoisson,
            seed,
        },
    )
}

/// Poisson-Poisson design: every edge `(i, a)` present independently with
/// probability `L / M`.
///
/// Each test walks the variables with geometric skips, so the cost is
/// proportional to the number of edges rather than `N * M`.
pub fn gen_poisson_poisson(
    n_variables: usize,
    n_tests: usize,
    mean_tests_per_variable: f64,
    seed: u64,
) -> Result<PoolDesign> {
    let (n, m) = (n_variables, n_tests);
    if n == 0 || m == 0 {
        return Err(Error::Param("N and M must be at least 1".into()));
    }
    let prob = mean_tests_per_variable / m as f64;
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(Error::Param(format!(
            "edge probability L/M = {prob} is not in (0, 1]"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let pools = (0..m)
        .map(|_| bernoulli_indices(n, prob, &mut rng))
        .collect();
    PoolDesign::new(
        n,
        pools,
        Provenance {
            family: Family::PoissonPoisson,
            seed,
        },
    )
}

/// Indices in `[0, n)` kept independently with probability `prob`, in order.
pub(crate) fn bernoulli_indices(n: usize, prob: f64, rng: &mut impl rand::Rng) -> Vec<u32> {
    if prob >= 1.0 {
        return (0..n as u32).collect();
    }
    let mut out = Vec::with_capacity((n as f64 * prob * 1.2) as usize + 4);
    let log_q = (-prob).ln_1p();
    let mut i = 0usize;
    loop {
        // 1 - u lies in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n - i) as f64 {
            break;
        }
        i += skip as usize;
        out.push(i as u32);
        i += 1;
        if i >= n {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_poisson_has_exact_variable_degree() {
        let d = gen_regular_poisson(500, 40, 4, 3).unwrap();
        assert!(d.degree_profile().variables.iter().all(|&x| x == 4));
        assert_eq!(d.n_edges(), 2000);
    }

    #[test]
    fn regular_poisson_full_degree_is_complete() {
        let d = gen_regular_poisson(6, 3, 3, 1).unwrap();
        assert!(d.pools().iter().all(|p| p == &[0, 1, 2, 3, 4, 5]));
    }

    #[test]
    fn regular_poisson_rejects_l_above_m() {
        assert!(gen_regular_poisson(6, 3, 4, 1).is_err());
    }

    #[test]
    fn poisson_poisson_full_probability_is_complete() {
        let d = gen_poisson_poisson(7, 4, 4.0, 1).unwrap();
        assert!(d.pools().iter().all(|p| p.len() == 7));
    }

    #[test]
    fn poisson_poisson_rejects_bad_probability() {
        assert!(gen_poisson_poisson(7, 4, 5.0, 1).is_err());
        assert!(gen_poisson_poisson(7, 4, 0.0, 1).is_err());
    }

    #[test]
    fn samplers_are_deterministic() {
        assert_eq!(
            gen_regular_poisson(300, 30, 3, 9).unwrap(),
            gen_regular_poisson(300, 30, 3, 9).unwrap()
        );
        assert_eq!(
            gen_poisson_poisson(300, 30, 3.0, 9).unwrap(),
            gen_poisson_poisson(300, 30, 3.0, 9).unwrap()
        );
        assert_ne!(
            gen_poisson_poisson(300, 30, 3.0, 9).unwrap().pools(),
            gen_poisson_poisson(300, 30, 3.0, 10).unwrap().pools()
        );
    }
}
