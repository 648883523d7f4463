//! Pool-design families and their optimal parameters.

mod girth6;
mod params;
mod random;

pub use girth6::{gen_regular_regular_girth6, Girth6Build, RegularGirth6};
pub use params::{
    girth_feasibility, integer_part, optimal_params, DesignParams, DEFAULT_MAX_RESTARTS,
};
pub use random::{gen_poisson_poisson, gen_regular_poisson};

pub(crate) use random::bernoulli_indices;
