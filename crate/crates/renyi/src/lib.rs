//! Rényi entropies of discrete measures under error-control families.
//!
//! A family Q of cells over a finite atom space declares which events an
//! observer can tell apart; the classical entropy H_α(μ;Q) is the infimum
//! of the order-α entropy over all μ-partitions drawn from Q, and the
//! weighted entropy ranges over *divisions*, which split each atom's mass
//! fractionally across the cells containing it. The two infima coincide,
//! and this crate makes that equivalence — along with the sandwich bounds
//! for mixtures and the entropy-dimension limit rules — checkable on
//! concrete instances:
//!
//! * [`search`] computes H_α(μ;Q) exactly by assignment enumeration (in
//!   parallel with the default `parallel` feature) or greedily,
//! * [`division`] carries the merge and peel constructions that transport
//!   partitions to divisions and back,
//! * [`bounds`] evaluates the quasi-arithmetic mixture bounds,
//! * [`dimension`] regresses entropy against scale to estimate Rényi
//!   dimension and checks the max/min rule for mixtures,
//! * [`verify`] runs the seeded end-to-end verification sweeps.
//!
//! ```
//! use renyi::{AlphaOrder, DiscreteMeasure};
//! use renyi::family::CellFamily;
//! use renyi::search::classical_entropy_exact;
//!
//! let mu = DiscreteMeasure::from_weights(&[0.5, 0.25, 0.25])?;
//! // overlapping cells: atom 1 may report through either cell
//! let q = CellFamily::from_lists(&[&[0, 1], &[1, 2]])?;
//! let alpha = AlphaOrder::new(2.0)?;
//! let result = classical_entropy_exact(&mu, &q, alpha)?;
//! // concentrating atom 1 with atom 0 minimizes: masses (0.75, 0.25)
//! let expected = -f64::log2(0.75f64.powi(2) + 0.25f64.powi(2));
//! assert!((result.value.bits().unwrap() - expected).abs() < 1e-12);
//! # Ok::<(), renyi::Error>(())
//! ```

pub mod bounds;
pub mod dimension;
pub mod division;
pub mod entropy;
pub mod error;
pub mod family;
pub mod io;
pub mod measure;
pub mod search;
pub mod tol;
pub mod verify;

pub use entropy::{AlphaOrder, EntropyValue};
pub use error::{Error, Result};
pub use measure::{Atom, AtomSpace, DiscreteMeasure, MixtureSpec};
