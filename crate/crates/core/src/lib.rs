//! Equilibrium dividend thresholds for a diffusion surplus with a
//! discounted ruin penalty.
//!
//! The crate provides closed-form value functions for threshold strategies,
//! solvers for the equilibrium threshold and the constraint-matched
//! multiplier, residual checks of the extended HJB system, and a Monte Carlo
//! simulator used to check all of them independently.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod output;
pub mod roots;
pub mod verify;

pub use closed_form::{ruin_probability, Side, ThresholdCoefficients, ThresholdValue};
pub use equilibrium::{
    classify_regime, constrained_threshold, match_constraint, solve_threshold, ConstraintMatch,
    EquilibriumSolution, Regime, RegimeReport,
};
pub use error::{Error, Result};
pub use model::{characteristic_roots, CharRoots, Model, ModelParams};
