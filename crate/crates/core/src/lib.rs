//! Simulation kernels and exact oracles for discrete- and continuous-time
//! stochastic processes.
//!
//! The crate is `no_std` and needs only `alloc`. Every random quantity is
//! drawn from a counter-based [`RandomStream`] addressed by
//! `(master_seed, stream_id)`, so any Monte Carlo result is a pure function
//! of its seed and parameters, whatever executor runs the paths.
//!
//! Module map:
//!
//! * [`simcore`]: random streams, paths, Monte Carlo estimates, KS statistics
//!   and the [`Executor`] abstraction used to fan paths out.
//! * [`discrete`]: random walks, Ehrenfest and Pólya urns, Galton–Watson trees.
//! * [`martingale`]: Doob decomposition, brackets, predictable transforms,
//!   stopping rules, upcrossings and maximal-inequality audits.
//! * [`brownian`]: Brownian sampling, the dyadic midpoint construction,
//!   reflection and exact first-passage sampling.
//! * [`ito`]: Itô and Stratonovich sums against sampled paths.
//! * [`sde`]: Euler–Maruyama, Picard iteration and closed-form linear SDEs.
//! * [`diffusion`]: generators, finite-difference boundary-value and
//!   Fokker–Planck solvers, exit-time Monte Carlo and closed forms.

#![no_std]
#![forbid(unsafe_code)]
// Once std is anywhere in the build graph, f64 methods resolve inherently
// and the libm-backed `Float` imports become redundant.
#![allow(unused_imports)]
// `!(x > 0.0)` is how NaN gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod brownian;
pub mod diffusion;
pub mod discrete;
mod error;
pub mod ito;
pub mod martingale;
pub mod numerics;
pub mod sde;
pub mod simcore;

pub use error::{Error, Result};
pub use simcore::{
    derive_stream, mc_estimate, Executor, McEstimate, Path, RandomStream, Sequential, StreamPlan,
};
