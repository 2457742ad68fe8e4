//! Discrete-time martingale tools.
//!
//! Conditional expectations are taken exactly from a [`TransitionKernel`],
//! so decompositions and brackets are deterministic functions of the
//! observed path rather than regressions on samples.
//!
//! [`TransitionKernel`]: crate::discrete::TransitionKernel

mod doob;
mod maximal;
mod stopping;
mod transform;
mod upcrossing;

pub use doob::{
    bracket_process, bracket_process_chain, doob_decomposition, doob_decomposition_chain,
    DoobDecomposition,
};
pub use maximal::{maximal_inequality_audit, MaximalAudit, PathSummary};
pub use stopping::{stopped_path, stopping_time, Region, StoppingRule};
pub use transform::{
    doubling_strategy_law, doubling_strategy_laws, doubling_strategy_stakes, predictable_transform,
    DOUBLING_MAX_STEPS,
};
pub use upcrossing::upcrossings;
