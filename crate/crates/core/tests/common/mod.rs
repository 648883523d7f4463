#![allow(dead_code)]

use grouptest::decode::decode_two_stage;
use grouptest::{Assignment, PoolDesign};
use proptest::prelude::*;

/// Arbitrary small design: up to `max_n` variables, up to `max_m` pools.
pub fn arb_design(max_n: usize, max_m: usize) -> impl Strategy<Value = PoolDesign> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), m).prop_map(move |rows| {
            let pools: Vec<Vec<u32>> = rows
                .iter()
                .map(|r| (0..n as u32).filter(|&i| r[i as usize]).collect())
                .collect();
            let refs: Vec<&[u32]> = pools.iter().map(|p| p.as_slice()).collect();
            PoolDesign::from_pools(n, &refs).unwrap()
        })
    })
}

/// `(E|U0|, E|U1|)` by decoding every assignment with the set-based decoder
/// and weighting it by a plain product of `p` and `q` factors.
pub fn naive_expectations(d: &PoolDesign, p: f64) -> (f64, f64) {
    let n = d.n_variables();
    let (mut u0, mut u1) = (0.0, 0.0);
    for mask in 0..1u64 << n {
        let x = Assignment::from_mask(n, mask);
        let w: f64 = x
            .bits()
            .iter()
            .map(|&b| if b { p } else { 1.0 - p })
            .product();
        let r = decode_two_stage(d, &x).unwrap();
        u0 += w * r.undetermined_zeros.len() as f64;
        u1 += w * r.undetermined_ones.len() as f64;
    }
    (u0, u1)
}

/// B by direct products, no logarithms.
pub fn naive_b(d: &PoolDesign, p: f64) -> f64 {
    let q = 1.0 - p;
    (0..d.n_variables())
        .map(|i| {
            d.tests_of(i)
                .iter()
                .map(|&a| 1.0 - q.powi(d.pool(a as usize).len() as i32 - 1))
                .product::<f64>()
        })
        .sum::<f64>()
        * q
}

/// Does some pair of variables share two tests?
pub fn naive_has_four_cycle(d: &PoolDesign) -> bool {
    let n = d.n_variables();
    for i in 0..n {
        for j in i + 1..n {
            let shared = d
                .pools()
                .iter()
                .filter(|pool| pool.contains(&(i as u32)) && pool.contains(&(j as u32)))
                .count();
            if shared >= 2 {
                return true;
            }
        }
    }
    false
}
