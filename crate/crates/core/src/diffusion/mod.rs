//! Generators, boundary-value and Fokker–Planck solvers, exit-time Monte
//! Carlo, and closed forms used as oracles.

mod bvp;
mod closed_form;
mod density;
mod exit;
mod generator;

pub use bvp::{solve_exit_bvp, BvpProblem, GridFunction, BVP_MIN_INTERVALS};
pub use closed_form::{closed_form, ClosedForm};
pub use density::{evolve_density, DensityEvolution, DensityGrid, MASS_DRIFT_WARNING};
pub use exit::{
    arcsine_cdf, arcsine_occupation, boundary_shift, ehrenfest_rescaled_moments, mc_ball_exit,
    mc_drifted_exit, mc_exit_statistics, shifted_bias, AdaptiveStep, BallExit, ExitConfig,
    ExitOutcome, ExitSide, ExitStatistics,
};
pub use generator::{apply_adjoint, apply_generator, TestFunction};
