//! Pool designs: the bipartite incidence between variables and tests.
//!
//! Indices are 0-based throughout. A design stores one sorted member list per
//! test and derives the per-variable view on construction, so both views
//! always describe the same edge set.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Design family tag carried in the provenance of a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Every variable in exactly `L` tests, tests (near-)regular, no 4-cycles.
    #[serde(rename = "rr6")]
    RegularRegularGirth6,
    /// Every variable in a uniformly random `L`-subset of the tests.
    #[serde(rename = "rp")]
    RegularPoisson,
    /// Every edge present independently with probability `L / M`.
    #[serde(rename = "pp")]
    PoissonPoisson,
    /// Hand-written or externally produced design.
    #[serde(rename = "custom")]
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RegularRegularGirth6 => "rr6",
            Family::RegularPoisson => "rp",
            Family::PoissonPoisson => "pp",
            Family::Custom => "custom",
        }
    }

    /// Families whose variable degree is fixed.
    pub fn is_variable_regular(self) -> bool {
        matches!(self, Family::RegularRegularGirth6 | Family::RegularPoisson)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rr6" | "regular-regular" | "regularregulargirth6" => Ok(Family::RegularRegularGirth6),
            "rp" | "regular-poisson" | "regularpoisson" => Ok(Family::RegularPoisson),
            "pp" | "poisson-poisson" | "poissonpoisson" => Ok(Family::PoissonPoisson),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Param(format!("unknown design family '{other}'"))),
        }
    }
}

/// Where a design came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub family: Family,
    pub seed: u64,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            family: Family::Custom,
            seed: 0,
        }
    }
}

/// A first-stage pooling design with `N` variables and `M` tests.
#[derive(Debug, Clone)]
pub struct PoolDesign {
    n_variables: usize,
    tests: Vec<Vec<u32>>,
    var_tests: Vec<Vec<u32>>,
    provenance: Provenance,
}

impl PartialEq for PoolDesign {
    fn eq(&self, other: &Self) -> bool {
        self.n_variables == other.n_variables
            && self.tests == other.tests
            && self.provenance == other.provenance
    }
}

impl Eq for PoolDesign {}

impl PoolDesign {
    /// Builds a design from per-test member lists.
    ///
    /// Member lists are sorted; duplicate or out-of-range indices are rejected.
    /// Empty pools are allowed.
    pub fn new(
        n_variables: usize,
        mut tests: Vec<Vec<u32>>,
        provenance: Provenance,
    ) -> Result<Self> {
        if n_variables == 0 {
            return Err(Error::Validation("N must be at least 1".into()));
        }
        if tests.is_empty() {
            return Err(Error::Validation("M must be at least 1".into()));
        }
        if n_variables > u32::MAX as usize {
            return Err(Error::Validation(format!(
                "N = {n_variables} exceeds the u32 index range"
            )));
        }
        for (a, pool) in tests.iter_mut().enumerate() {
            pool.sort_unstable();
            if let Some(&last) = pool.last() {
                if last as usize >= n_variables {
                    return Err(Error::Validation(format!(
                        "test {a} contains variable {last}, outside [0, {n_variables})"
                    )));
                }
            }
            if let Some(w) = pool.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!(
                    "test {a} lists variable {} twice",
                    w[0]
                )));
            }
        }
        let mut var_tests = vec![Vec::new(); n_variables];
        for (a, pool) in tests.iter().enumerate() {
            for &i in pool {
                var_tests[i as usize].push(a as u32);
            }
        }
        Ok(PoolDesign {
            n_variables,
            tests,
            var_tests,
            provenance,
        })
    }

    /// Convenience constructor for hand-written designs.
    pub fn from_pools(n_variables: usize, pools: &[&[u32]]) -> Result<Self> {
        Self::new(
            n_variables,
            pools.iter().map(|p| p.to_vec()).collect(),
            Provenance::default(),
        )
    }

    pub fn n_variables(&self) -> usize {
        self.n_variables
    }

    pub fn n_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn n_edges(&self) -> usize {
        self.tests.iter().map(Vec::len).sum()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Sorted members of test `a`.
    pub fn pool(&self, a: usize) -> &[u32] {
        &self.tests[a]
    }

    pub fn pools(&self) -> &[Vec<u32>] {
        &self.tests
    }

    /// Sorted tests containing variable `i`.
    pub fn tests_of(&self, i: usize) -> &[u32] {
        &self.var_tests[i]
    }

    pub fn contains(&self, i: usize, a: usize) -> bool {
        self.tests[a].binary_search(&(i as u32)).is_ok()
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        DegreeProfile {
            variables: self.var_tests.iter().map(Vec::len).collect(),
            tests: self.tests.iter().map(Vec::len).collect(),
        }
    }

    /// True iff no two distinct variables share two distinct tests.
    pub fn girth_at_least_6(&self) -> bool {
        let mut seen_with = vec![u32::MAX; self.n_variables];
        for i in 0..self.n_variables {
            for &a in &self.var_tests[i] {
                for &j in &self.tests[a as usize] {
                    if j as usize == i {
                        continue;
                    }
                    if seen_with[j as usize] == i as u32 {
                        return false;
                    }
                    seen_with[j as usize] = i as u32;
                }
            }
        }
        true
    }

    /// Length-4 loops through `variable`, counted as triples `(j, a, b)`.
    pub fn four_cycle_census(&self, variable: usize) -> Result<CycleCensus> {
        if variable >= self.n_variables {
            return Err(Error::IndexOutOfRange {
                index: variable,
                len: self.n_variables,
            });
        }
        let mut shared: HashMap<u32, u32> = HashMap::new();
        for &a in &self.var_tests[variable] {
            for &j in &self.tests[a as usize] {
                if j as usize != variable {
                    *shared.entry(j).or_insert(0) += 1;
                }
            }
        }
        let four_cycle_count = shared.values().map(|&s| pairs(s)).sum();
        let has_type_d = shared.values().any(|&s| s >= 3);
        let (tests_on_cycles, tests_off_cycles) =
            self.var_tests[variable].iter().partition(|&&a| {
                self.tests[a as usize]
                    .iter()
                    .any(|j| shared.get(j).is_some_and(|&s| s >= 2))
            });
        Ok(CycleCensus {
            variable,
            four_cycle_count,
            has_type_d,
            tests_on_cycles,
            tests_off_cycles,
        })
    }

    /// Loop counts for every variable at once.
    pub fn four_cycle_counts(&self) -> Vec<u64> {
        let mut shared = vec![0u32; self.n_variables];
        let mut touched = Vec::new();
        let mut counts = Vec::with_capacity(self.n_variables);
        for i in 0..self.n_variables {
            for &a in &self.var_tests[i] {
                for &j in &self.tests[a as usize] {
                    if j as usize != i {
                        if shared[j as usize] == 0 {
                            touched.push(j);
                        }
                        shared[j as usize] += 1;
                    }
                }
            }
            let mut c = 0;
            for j in touched.drain(..) {
                c += pairs(shared[j as usize]);
                shared[j as usize] = 0;
            }
            counts.push(c);
        }
        counts
    }
}

fn pairs(s: u32) -> u64 {
    let s = s as u64;
    s * s.saturating_sub(1) / 2
}

/// Degrees on both sides of a design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub variables: Vec<usize>,
    pub tests: Vec<usize>,
}

impl DegreeProfile {
    pub fn n_edges(&self) -> usize {
        self.tests.iter().sum()
    }

    pub fn variable_range(&self) -> (usize, usize) {
        min_max(&self.variables)
    }

    pub fn test_range(&self) -> (usize, usize) {
        min_max(&self.tests)
    }
}

fn min_max(xs: &[usize]) -> (usize, usize) {
    let lo = xs.iter().copied().min().unwrap_or(0);
    let hi = xs.iter().copied().max().unwrap_or(0);
    (lo, hi)
}

/// Local 4-cycle structure around one variable `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleCensus {
    pub variable: usize,
    /// Number of triples `(j, a, b)`, `j != i`, `a < b`, with `i, j` in both tests.
    pub four_cycle_count: u64,
    /// Some other variable shares at least three tests with `i`.
    pub has_type_d: bool,
    /// Tests of `i` that lie on at least one 4-cycle through `i`.
    pub tests_on_cycles: Vec<u32>,
    /// The remaining tests of `i`.
    pub tests_off_cycles: Vec<u32>,
}

impl CycleCensus {
    /// More than `n` loops pass through the variable.
    pub fn exceeds(&self, n: u64) -> bool {
        self.four_cycle_count > n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize, pools: &[&[u32]]) -> PoolDesign {
        PoolDesign::from_pools(n, pools).unwrap()
    }

    #[test]
    fn girth_examples() {
        assert!(d(3, &[&[0, 1], &[1, 2]]).girth_at_least_6());
        assert!(!d(2, &[&[0, 1], &[0, 1]]).girth_at_least_6());
        assert!(d(4, &[&[0, 1, 2], &[2, 3], &[3, 0]]).girth_at_least_6());
    }

    #[test]
    fn census_examples() {
        let c = d(2, &[&[0, 1], &[0, 1]]).four_cycle_census(0).unwrap();
        assert_eq!(c.four_cycle_count, 1);
        assert!(!c.has_type_d);
        assert_eq!(c.tests_on_cycles, vec![0, 1]);
        assert!(c.tests_off_cycles.is_empty());

        let c = d(2, &[&[0, 1], &[0, 1], &[0, 1]])
            .four_cycle_census(0)
            .unwrap();
        assert_eq!(c.four_cycle_count, 3);
        assert!(c.has_type_d);
        assert!(c.exceeds(2) && !c.exceeds(3));

        let g6 = d(4, &[&[0, 1, 2], &[2, 3], &[3, 0]]);
        for i in 0..4 {
            let c = g6.four_cycle_census(i).unwrap();
            assert_eq!(c.four_cycle_count, 0);
            assert!(c.tests_on_cycles.is_empty());
        }
    }

    #[test]
    fn census_splits_tests() {
        // 0 and 1 share tests 0 and 1; test 2 holds 0 with 2 only.
        let c = d(3, &[&[0, 1], &[0, 1, 2], &[0, 2]])
            .four_cycle_census(0)
            .unwrap();
        // pair (0,1) shares {0,1}; pair (0,2) shares {1,2}
        assert_eq!(c.four_cycle_count, 2);
        assert_eq!(c.tests_on_cycles, vec![0, 1, 2]);
        let c = d(4, &[&[0, 1], &[0, 1], &[0, 3]])
            .four_cycle_census(0)
            .unwrap();
        assert_eq!(c.tests_on_cycles, vec![0, 1]);
        assert_eq!(c.tests_off_cycles, vec![2]);
    }

    #[test]
    fn census_rejects_bad_index() {
        assert!(matches!(
            d(2, &[&[0, 1]]).four_cycle_census(2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn degree_examples() {
        let p = d(3, &[&[0, 1], &[1, 2]]).degree_profile();
        assert_eq!(p.variables, vec![1, 2, 1]);
        assert_eq!(p.tests, vec![2, 2]);
        let p = d(1, &[&[], &[0]]).degree_profile();
        assert_eq!(p.tests, vec![0, 1]);
    }

    #[test]
    fn validation() {
        assert!(PoolDesign::from_pools(0, &[&[]]).is_err());
        assert!(PoolDesign::from_pools(2, &[]).is_err());
        assert!(PoolDesign::from_pools(2, &[&[0, 2]]).is_err());
        assert!(PoolDesign::from_pools(3, &[&[1, 0, 1]]).is_err());
        // unsorted input is normalised
        assert_eq!(d(3, &[&[2, 0]]).pool(0), &[0, 2]);
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            Family::RegularRegularGirth6,
            Family::RegularPoisson,
            Family::PoissonPoisson,
            Family::Custom,
        ] {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert!("bogus".parse::<Family>().is_err());
    }
}
