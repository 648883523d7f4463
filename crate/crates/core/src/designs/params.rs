use std::f64::consts::{E, LN_2};

use num_rational::Ratio;
use serde::Serialize;

use crate::design::{Family, PoolDesign};
use crate::error::{Error, Feasibility, Result};

use super::{gen_poisson_poisson, gen_regular_poisson, RegularGirth6};

/// Restarts allowed when a girth-6 design is generated from parameters.
pub const DEFAULT_MAX_RESTARTS: u32 = 10;

/// Family plus `(N, p, L, M)`; `L` is exact for regular families and the mean
/// variable degree for Poisson-Poisson.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignParams {
    pub family: Family,
    pub n_variables: usize,
    pub defect_prob: f64,
    pub tests_per_variable: u64,
    pub n_tests: u64,
    pub seed: u64,
}

impl DesignParams {
    pub fn new(
        family: Family,
        n_variables: usize,
        defect_prob: f64,
        tests_per_variable: u64,
        n_tests: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(defect_prob > 0.0 && defect_prob < 1.0) {
            return Err(Error::Param(format!("p = {defect_prob} is not in (0, 1)")));
        }
        if n_variables == 0 {
            return Err(Error::Param("N must be at least 1".into()));
        }
        if tests_per_variable == 0 || n_tests == 0 {
            return Err(Error::Param(format!(
                "L = {tests_per_variable} and M = {n_tests} must both be at least 1"
            )));
        }
        if tests_per_variable > n_tests {
            return Err(Error::Param(format!(
                "L = {tests_per_variable} exceeds M = {n_tests}"
            )));
        }
        if family.is_variable_regular() && n_tests > n_variables as u64 {
            return Err(Error::Param(format!(
                "M = {n_tests} exceeds N = {n_variables}"
            )));
        }
        Ok(DesignParams {
            family,
            n_variables,
            defect_prob,
            tests_per_variable,
            n_tests,
            seed,
        })
    }

    /// `K = N L / M` as an exact fraction.
    pub fn mean_test_degree(&self) -> Ratio<u64> {
        Ratio::new(
            self.n_variables as u64 * self.tests_per_variable,
            self.n_tests,
        )
    }

    pub fn mean_test_degree_f64(&self) -> f64 {
        self.n_variables as f64 * self.tests_per_variable as f64 / self.n_tests as f64
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn feasibility(&self) -> Feasibility {
        girth_feasibility(self.n_variables, self.tests_per_variable, self.n_tests)
    }

    /// Draws one design of this family.
    pub fn generate(&self) -> Result<PoolDesign> {
        let n = self.n_variables;
        let l = self.tests_per_variable as usize;
        let m = self.n_tests as usize;
        match self.family {
            Family::RegularRegularGirth6 => RegularGirth6::new(n, l, m)
                .max_restarts(DEFAULT_MAX_RESTARTS)
                .build(self.seed)
                .map(|b| b.design),
            Family::RegularPoisson => gen_regular_poisson(n, m, l, self.seed),
            Family::PoissonPoisson => gen_poisson_poisson(n, m, l as f64, self.seed),
            Family::Custom => Err(Error::Param("custom designs cannot be generated".into())),
        }
    }
}

/// Integer part `[x]`, snapping values within rounding noise of an integer so
/// that e.g. `|log p| / log 2` at `p = 2^-k` gives exactly `k`.
pub fn integer_part(x: f64) -> u64 {
    if !(x > 0.0) {
        return 0;
    }
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        x.floor() as u64
    }
}

/// Asymptotically optimal `(L, M)` for a family at `(N, p)`.
///
/// Regular families use `L = [|log p| / log 2]`, `M = [N p |log p| / (log 2)^2]`;
/// Poisson-Poisson uses `L = [e |log p|]`, `M = [e N p |log p|]`.
pub fn optimal_params(n_variables: usize, p: f64, family: Family) -> Result<DesignParams> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Param(format!("p = {p} is not in (0, 1)")));
    }
    if n_variables == 0 {
        return Err(Error::Param("N must be at least 1".into()));
    }
    let n = n_variables as f64;
    let log2_abs = -p.log2();
    let ln_abs = -p.ln();
    let (l, m) = match family {
        Family::RegularRegularGirth6 | Family::RegularPoisson => (
            integer_part(log2_abs),
            integer_part(n * p * log2_abs / LN_2),
        ),
        Family::PoissonPoisson => (integer_part(E * ln_abs), integer_part(E * n * p * ln_abs)),
        Family::Custom => {
            return Err(Error::Param(
                "custom family has no optimal parameters".into(),
            ))
        }
    };
    if l == 0 || m == 0 {
        return Err(Error::DegenerateParams(format!(
            "N = {n_variables}, p = {p} rounds to L = {l}, M = {m}"
        )));
    }
    DesignParams::new(family, n_variables, p, l, m, 0).map_err(|e| match e {
        Error::Param(msg) => Error::DegenerateParams(msg),
        other => other,
    })
}

/// Existence condition for regular girth-6 graphs used by the construction literature:
/// `M >= (L-1) K / (L K - L - K)` with `K = N L / M`.
pub fn girth_feasibility(n_variables: usize, l: u64, m: u64) -> Feasibility {
    let l_f = l as f64;
    let k = n_variables as f64 * l_f / m as f64;
    let denom = l_f * k - l_f - k;
    let required = if denom > 0.0 {
        (l_f - 1.0) * k / denom
    } else {
        f64::INFINITY
    };
    Feasibility {
        n_tests: m,
        required,
        satisfied: (m as f64) >= required,
    }
}
