//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Errors produced by measure construction, entropy computation, search,
/// and I/O. The CLI maps these onto its exit-code contract: input/contract
/// problems → 2, exhausted enumeration budgets → 3, failed verification → 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data (unknown ids, bad simplex,
    /// invalid ladders, unreadable files, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exhaustive enumeration would exceed the assignment budget; the
    /// greedy method remains available.
    #[error("enumeration budget exceeded: {required} assignments > budget {budget}")]
    Budget { required: u128, budget: u64 },

    /// Too little usable data to fit a regression.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A verified inequality failed beyond tolerance.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
