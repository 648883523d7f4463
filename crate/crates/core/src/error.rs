use std::fmt;

/// Outcome of the girth-6 feasibility inequality for a (N, L, M) triple.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Feasibility {
    /// Number of tests M.
    pub n_tests: u64,
    /// Right-hand side `(L-1)K / (LK - L - K)`, infinite when the denominator is not positive.
    pub required: f64,
    pub satisfied: bool,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.satisfied {
            "satisfied"
        } else {
            "violated"
        };
        write!(
            f,
            "M = {} vs required {:.4}: {}",
            self.n_tests, self.required, verdict
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid design: {0}")]
    Validation(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("index {index} out of range [0, {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: design has {expected} variables, assignment has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("p too large for asymptotic design: {0}")]
    DegenerateParams(String),
    #[error("girth-6 construction failed after {restarts} restarts (feasibility {feasibility})")]
    Construction {
        restarts: u32,
        feasibility: Feasibility,
    },
    #[error("exhaustive enumeration is limited to N <= {max}, got N = {n}")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
