//! Centralized numeric tolerances and budgets.
//!
//! All entropy arithmetic is 64-bit floating point; the constants below
//! separate "mass bookkeeping" precision from looser statistical checks so
//! that every comparison in the crate names the tolerance it uses.

/// Tolerance for probability-mass checks (total mass ≈ 1, simplex sums).
pub const MASS_EPS: f64 = 1e-9;

/// Tolerance for exact set-mass identities: partition coverage, division
/// support and atomwise reconstruction, majorization prefix sums.
pub const SET_MASS_EPS: f64 = 1e-12;

/// Guard band around α = 1; orders inside it are rejected to avoid
/// catastrophic cancellation in 1/(1−α). The Shannon functional covers
/// the limit itself.
pub const ALPHA_GUARD: f64 = 1e-6;

/// Default tolerance for dimension-slope comparisons (depth ≥ 10 ladders).
pub const DIM_TOL: f64 = 0.02;

/// Default cap on exhaustive assignment enumeration.
pub const ENUM_BUDGET: u64 = 10_000_000;
