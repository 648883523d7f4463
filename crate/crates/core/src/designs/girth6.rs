//! Regular-regular designs without 4-cycles, built by progressive edge growth.
//!
//! Variables are placed in index order. Each variable takes its `L` tests one
//! at a time, always from the least-loaded tests that would not close a
//! 4-cycle, ties broken by the seeded generator. Test loads are capped at
//! `ceil(NL/M)`, and once the remaining edges exactly cover the tests still
//! below `floor(NL/M)` only those may be chosen. A dead end undoes the last
//! placements (doubling the depth on repeated failures) and, past a failure
//! budget, restarts from a fresh stream.

use rand::Rng as _;

use crate::design::{Family, PoolDesign, Provenance};
use crate::error::{Error, Feasibility, Result};
use crate::rng::{stream, Rng};

use super::params::{girth_feasibility, DEFAULT_MAX_RESTARTS};

/// Builder for regular girth-6 designs.
#[derive(Debug, Clone)]
pub struct RegularGirth6 {
    n_variables: usize,
    tests_per_variable: usize,
    n_tests: usize,
    max_restarts: u32,
}

/// A successful girth-6 construction.
#[derive(Debug, Clone)]
pub struct Girth6Build {
    pub design: PoolDesign,
    /// Restarts consumed before success (0 = first attempt).
    pub restarts: u32,
    pub feasibility: Feasibility,
}

impl RegularGirth6 {
    pub fn new(n_variables: usize, tests_per_variable: usize, n_tests: usize) -> Self {
        RegularGirth6 {
            n_variables,
            tests_per_variable,
            n_tests,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }

    pub fn max_restarts(mut self, max_restarts: u32) -> Self {
        self.max_restarts = max_restarts;
        self
    }

    pub fn feasibility(&self) -> Feasibility {
        girth_feasibility(
            self.n_variables,
            self.tests_per_variable as u64,
            self.n_tests as u64,
        )
    }

    pub fn build(&self, seed: u64) -> Result<Girth6Build> {
        let (n, l, m) = (self.n_variables, self.tests_per_variable, self.n_tests);
        if n == 0 || m == 0 {
            return Err(Error::Param("N and M must be at least 1".into()));
        }
        if l == 0 || l > m {
            return Err(Error::Param(format!(
                "need 1 <= L <= M, got L = {l}, M = {m}"
            )));
        }
        if n.checked_mul(l).is_none_or(|e| e > u32::MAX as usize) {
            return Err(Error::Param(
                "N * L exceeds the supported edge count".into(),
            ));
        }
        let feasibility = self.feasibility();
        let failure_budget = 256 + n / 4;
        for restart in 0..=self.max_restarts {
            let mut rng = stream(seed, restart as u64);
            let Some(tests) = Peg::new(n, l, m).run(&mut rng, failure_budget) else {
                continue;
            };
            let design = PoolDesign::new(
                n,
                tests,
                Provenance {
                    family: Family::RegularRegularGirth6,
                    seed,
                },
            )?;
            let profile = design.degree_profile();
            if !design.girth_at_least_6() || profile.variables.iter().any(|&d| d != l) {
                return Err(Error::Validation(
                    "girth-6 builder produced a design violating its postconditions".into(),
                ));
            }
            return Ok(Girth6Build {
                design,
                restarts: restart,
                feasibility,
            });
        }
        Err(Error::Construction {
            restarts: self.max_restarts,
            feasibility,
        })
    }
}

/// Generates a regular girth-6 design, or fails after `max_restarts`.
pub fn gen_regular_regular_girth6(
    n_variables: usize,
    tests_per_variable: usize,
    n_tests: usize,
    seed: u64,
    max_restarts: u32,
) -> Result<PoolDesign> {
    RegularGirth6::new(n_variables, tests_per_variable, n_tests)
        .max_restarts(max_restarts)
        .build(seed)
        .map(|b| b.design)
}

struct Peg {
    n: usize,
    l: usize,
    floor_load: usize,
    cap: usize,
    pools: Vec<Vec<u32>>,
    chosen: Vec<Vec<u32>>,
    /// Tests grouped by current load.
    buckets: Vec<Vec<u32>>,
    slot: Vec<usize>,
    /// Sum over tests of `max(0, floor_load - load)`.
    deficit: usize,
    mark: Vec<u32>,
    epoch: u32,
}

impl Peg {
    fn new(n: usize, l: usize, m: usize) -> Self {
        let edges = n * l;
        let floor_load = edges / m;
        let cap = edges.div_ceil(m);
        let mut buckets = vec![Vec::new(); cap + 1];
        buckets[0] = (0..m as u32).collect();
        Peg {
            n,
            l,
            floor_load,
            cap,
            pools: vec![Vec::with_capacity(cap); m],
            chosen: vec![Vec::with_capacity(l); n],
            buckets,
            slot: (0..m).collect(),
            deficit: floor_load * m,
            mark: vec![0; m],
            epoch: 0,
        }
    }

    fn run(mut self, rng: &mut Rng, failure_budget: usize) -> Option<Vec<Vec<u32>>> {
        let mut v = 0;
        let mut frontier = 0;
        let mut streak = 0u32;
        let mut failures = 0;
        while v < self.n {
            if self.place(v, rng) {
                v += 1;
                if v > frontier {
                    frontier = v;
                    streak = 0;
                }
                continue;
            }
            self.unplace(v);
            failures += 1;
            if failures > failure_budget {
                return None;
            }
            let depth = (1usize << streak.min(16)).min(v);
            streak += 1;
            for _ in 0..depth {
                v -= 1;
                self.unplace(v);
            }
        }
        Some(self.pools)
    }

    fn place(&mut self, v: usize, rng: &mut Rng) -> bool {
        self.next_epoch();
        for k in 0..self.l {
            let remaining = (self.n - v) * self.l - k;
            let limit = if remaining == self.deficit {
                self.floor_load
            } else {
                self.cap
            };
            let Some(t) = self.pick(limit, rng) else {
                return false;
            };
            self.add_edge(v, t);
            for &u in &self.pools[t as usize] {
                for &t2 in &self.chosen[u as usize] {
                    self.mark[t2 as usize] = self.epoch;
                }
            }
        }
        true
    }

    /// Least-loaded unmarked test with load below `limit`.
    fn pick(&self, limit: usize, rng: &mut Rng) -> Option<u32> {
        for bucket in self.buckets.iter().take(limit) {
            if bucket.is_empty() {
                continue;
            }
            let len = bucket.len();
            for _ in 0..8 {
                let t = bucket[rng.random_range(0..len)];
                if self.mark[t as usize] != self.epoch {
                    return Some(t);
                }
            }
            let start = rng.random_range(0..len);
            if let Some(&t) = (0..len)
                .map(|k| &bucket[(start + k) % len])
                .find(|&&t| self.mark[t as usize] != self.epoch)
            {
                return Some(t);
            }
        }
        None
    }

    fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.mark.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    fn move_test(&mut self, t: u32, from: usize, to: usize) {
        let pos = self.slot[t as usize];
        let bucket = &mut self.buckets[from];
        bucket.swap_remove(pos);
        if let Some(&moved) = bucket.get(pos) {
            self.slot[moved as usize] = pos;
        }
        self.slot[t as usize] = self.buckets[to].len();
        self.buckets[to].push(t);
    }

    fn add_edge(&mut self, v: usize, t: u32) {
        let load = self.pools[t as usize].len();
        self.move_test(t, load, load + 1);
        if load < self.floor_load {
            self.deficit -= 1;
        }
        self.pools[t as usize].push(v as u32);
        self.chosen[v].push(t);
    }

    fn unplace(&mut self, v: usize) {
        while let Some(t) = self.chosen[v].pop() {
            let popped = self.pools[t as usize].pop();
            debug_assert_eq!(popped, Some(v as u32));
            let load = self.pools[t as usize].len();
            self.move_test(t, load + 1, load);
            if load < self.floor_load {
                self.deficit += 1;
            }
        }
    }
}
