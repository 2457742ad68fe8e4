//! Discrete-time models: random walks, Markov chains (Ehrenfest), Pólya
//! urns, Galton–Watson trees and random sums, each with the exact
//! distributional facts used to check them.

mod chain;
mod galton_watson;
mod polya;
mod random_sum;
mod walk;

pub use chain::{simulate_ehrenfest, FiniteChain, TransitionKernel};
pub use galton_watson::{
    gw_extinction_probability, simulate_extinction, simulate_galton_watson, OffspringDistribution,
    TreeFate, POPULATION_CAP,
};
pub use polya::{
    polya_exact_law, polya_limit_cdf, simulate_polya, PolyaKernel, UrnState, POLYA_EXACT_MAX_STEPS,
};
pub use random_sum::{sample_poisson, simulate_random_sum};
pub use walk::{simple_walk, simulate_random_walk};
