//! The order-α Rényi functional on partitions, the g_α transform pair, and
//! a Shannon reference for α→1 checks. Logarithms are base 2 throughout.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{is_mu_partition, Partition};
use crate::measure::DiscreteMeasure;
use crate::tol::ALPHA_GUARD;

/// A validated entropy order α ∈ (0,1) ∪ (1,∞), kept outside the guard
/// band |α−1| ≥ 1e−6 where 1/(1−α) is numerically safe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AlphaOrder(f64);

impl AlphaOrder {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Input(format!("α must be a positive real, got {value}")));
        }
        if (value - 1.0).abs() < ALPHA_GUARD {
            return Err(Error::Input(format!(
                "α = {value} is inside the guard band |α−1| < {ALPHA_GUARD}"
            )));
        }
        Ok(AlphaOrder(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// True for the subadditive regime α ∈ (0,1).
    pub fn is_sub_one(&self) -> bool {
        self.0 < 1.0
    }
}

impl<'de> Deserialize<'de> for AlphaOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        AlphaOrder::new(v).map_err(serde::de::Error::custom)
    }
}

/// An extended-real entropy: finite bits, or +∞ when no acceptable
/// partition exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Finite(f64),
    Infinite,
}

impl EntropyValue {
    pub fn bits(&self) -> Option<f64> {
        match self {
            EntropyValue::Finite(b) => Some(*b),
            EntropyValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, EntropyValue::Infinite)
    }

    /// Total order with +∞ above every finite value; finite values compare
    /// by `f64::total_cmp` so reductions are deterministic.
    pub fn total_cmp(&self, other: &EntropyValue) -> Ordering {
        match (self, other) {
            (EntropyValue::Finite(a), EntropyValue::Finite(b)) => a.total_cmp(b),
            (EntropyValue::Finite(_), EntropyValue::Infinite) => Ordering::Less,
            (EntropyValue::Infinite, EntropyValue::Finite(_)) => Ordering::Greater,
            (EntropyValue::Infinite, EntropyValue::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for EntropyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

/// g_α(x) = 2^{(1−α)x}: the bijection turning Rényi entropies into power
/// sums. Ascending for α < 1, descending for α > 1.
pub fn g_alpha(x: f64, alpha: AlphaOrder) -> f64 {
    ((1.0 - alpha.value()) * x).exp2()
}

/// g_α⁻¹(x) = log₂(x) / (1−α), defined for x > 0.
pub fn g_alpha_inv(x: f64, alpha: AlphaOrder) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("g_α⁻¹ needs a positive argument, got {x}")));
    }
    Ok(x.log2() / (1.0 - alpha.value()))
}

/// Σ mᵅ over strictly positive masses; 0ᵅ terms are excluded by
/// construction.
pub fn power_sum(masses: impl IntoIterator<Item = f64>, alpha: AlphaOrder) -> f64 {
    masses
        .into_iter()
        .filter(|&m| m > 0.0)
        .map(|m| m.powf(alpha.value()))
        .sum()
}

/// h bits from a power sum: (1/(1−α))·log₂(S).
pub fn renyi_from_power_sum(s: f64, alpha: AlphaOrder) -> f64 {
    s.log2() / (1.0 - alpha.value())
}

/// Rényi entropy of the positive masses of a profile. The profile of an
/// empty or null measure has, by convention, zero entropy.
pub fn profile_entropy(masses: impl IntoIterator<Item = f64>, alpha: AlphaOrder) -> f64 {
    let s = power_sum(masses, alpha);
    if s == 0.0 {
        0.0
    } else {
        renyi_from_power_sum(s, alpha)
    }
}

/// h_α(μ;P) = (1/(1−α))·log₂[Σ_{P: μ(P)>0} μ(P)^α].
///
/// The partition is revalidated against μ, so a partition constructed for
/// a different measure is rejected rather than silently mis-summed.
pub fn partition_entropy(
    mu: &DiscreteMeasure,
    p: &Partition,
    alpha: AlphaOrder,
) -> Result<EntropyValue> {
    if !is_mu_partition(p.family(), mu) {
        return Err(Error::Precondition(
            "partition does not partition this measure".into(),
        ));
    }
    let masses = p.cells().iter().map(|c| mu.mass_of(c));
    Ok(EntropyValue::Finite(profile_entropy(masses, alpha)))
}

/// Shannon entropy h(μ;P) = −Σ μ(P)·log₂ μ(P): the α→1 reference.
pub fn shannon_partition_entropy(mu: &DiscreteMeasure, p: &Partition) -> Result<EntropyValue> {
    if !is_mu_partition(p.family(), mu) {
        return Err(Error::Precondition(
            "partition does not partition this measure".into(),
        ));
    }
    let bits: f64 = p
        .cells()
        .iter()
        .map(|c| mu.mass_of(c))
        .filter(|&m| m > 0.0)
        .map(|m| -m * m.log2())
        .sum();
    Ok(EntropyValue::Finite(bits))
}
