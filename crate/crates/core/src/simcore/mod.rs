//! Shared simulation plumbing: deterministic random streams, trajectory
//! containers, Monte Carlo estimators and goodness-of-fit statistics.

mod ensemble;
mod estimate;
mod ks;
mod path;
mod rng;

pub use ensemble::{ensemble, ensemble_estimate, Executor, Sequential, StreamPlan};
pub use estimate::{
    combined_stderr, mc_estimate, sample_correlation, McEstimate, MomentAccumulator, DEFAULT_Z,
};
pub use ks::{
    ks_critical_value_1pct, ks_statistic, ks_two_sample, ks_two_sample_critical_value_1pct,
};
pub use path::{Path, Prefix};
pub use rng::{derive_stream, philox4x32_10, sample_gaussian, RandomStream};
