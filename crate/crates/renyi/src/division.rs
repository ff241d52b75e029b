//! Divisions m ∈ V(μ;Q) — sub-measures assigned to family cells summing to
//! μ — with the two constructive bridges between divisions and partitions:
//! merge-by-π (partition → division) and the Hardy–Littlewood–Pólya peel
//! (division → partition).

use std::collections::{BTreeMap, BTreeSet};

use crate::entropy::{profile_entropy, AlphaOrder, EntropyValue};
use crate::error::{Error, Result};
use crate::family::{CellFamily, Partition};
use crate::measure::DiscreteMeasure;
use crate::tol::SET_MASS_EPS;

/// An assignment of a sub-measure to each family cell. Only cells with a
/// part present are stored; absent cells carry the zero measure.
#[derive(Debug, Clone)]
pub struct Division {
    family: CellFamily,
    parts: BTreeMap<usize, DiscreteMeasure>,
}

impl Division {
    /// Wraps parts without checking the division identities; use
    /// [`validate_division`] or [`Division::validated`] when the parts do
    /// not come from a correct-by-construction path.
    pub fn new_unchecked(family: CellFamily, parts: BTreeMap<usize, DiscreteMeasure>) -> Self {
        Division { family, parts }
    }

    /// Wraps parts and verifies both division invariants against μ.
    pub fn validated(
        family: CellFamily,
        parts: BTreeMap<usize, DiscreteMeasure>,
        mu: &DiscreteMeasure,
    ) -> Result<Self> {
        let m = Division::new_unchecked(family, parts);
        if !validate_division(&m, mu) {
            return Err(Error::Precondition(
                "parts are not a division of μ (support or mass mismatch)".into(),
            ));
        }
        Ok(m)
    }

    pub fn family(&self) -> &CellFamily {
        &self.family
    }

    pub fn parts(&self) -> &BTreeMap<usize, DiscreteMeasure> {
        &self.parts
    }

    /// (cell index, part total mass) for cells of strictly positive mass.
    pub fn positive_cell_masses(&self) -> Vec<(usize, f64)> {
        self.parts
            .iter()
            .map(|(&i, part)| (i, part.total_mass()))
            .filter(|(_, m)| *m > 0.0)
            .collect()
    }
}

/// True iff the parts vanish outside their cells and sum to μ atomwise,
/// both within `SET_MASS_EPS`.
pub fn validate_division(m: &Division, mu: &DiscreteMeasure) -> bool {
    for (&cell_idx, part) in m.parts() {
        let Some(cell) = m.family().cells().get(cell_idx) else {
            return false;
        };
        if !part.same_space(mu) {
            return false;
        }
        let outside: f64 = part
            .support()
            .filter(|(id, _)| !cell.contains(id))
            .map(|(_, w)| w)
            .sum();
        if outside > SET_MASS_EPS {
            return false;
        }
    }
    let mut recombined: BTreeMap<u32, f64> = BTreeMap::new();
    for part in m.parts().values() {
        for (id, w) in part.support() {
            *recombined.entry(id).or_insert(0.0) += w;
        }
    }
    let ids: BTreeSet<u32> = recombined
        .keys()
        .copied()
        .chain(mu.support().map(|(id, _)| id))
        .collect();
    ids.iter().all(|id| {
        let got = recombined.get(id).copied().unwrap_or(0.0);
        (got - mu.weight(*id)).abs() <= SET_MASS_EPS
    })
}

/// hv_α(μ;m) = (1/(1−α))·log₂(Σ m_Q(X)^α), summed over cells of positive
/// part mass. The division is trusted; validate first if its provenance
/// is unknown.
pub fn weighted_entropy(m: &Division, alpha: AlphaOrder) -> EntropyValue {
    let masses = m.positive_cell_masses().into_iter().map(|(_, mass)| mass);
    EntropyValue::Finite(profile_entropy(masses, alpha))
}

/// The merge construction: given P ≺ Q and a choice π of containing Q-cell
/// for each P-cell, set m_Q = μ restricted to the union of the P-cells sent
/// to Q. When `pi` is `None`, each P-cell goes to its lowest-index
/// containing Q-cell. Merging can only lower the entropy, so
/// `weighted_entropy(result) ≤ partition_entropy(μ,P)` at every α.
pub fn division_from_partition(
    p: &Partition,
    q: &CellFamily,
    mu: &DiscreteMeasure,
    pi: Option<&[usize]>,
) -> Result<Division> {
    if let Some(map) = pi {
        if map.len() != p.cells().len() {
            return Err(Error::Precondition(format!(
                "π maps {} cells but the partition has {}",
                map.len(),
                p.cells().len()
            )));
        }
    }
    let mut merged: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
    for (i, cell) in p.cells().iter().enumerate() {
        let positive = mu.mass_of(cell) > 0.0;
        let target = match pi {
            Some(map) => {
                let t = map[i];
                let container = q.cells().get(t).ok_or_else(|| {
                    Error::Precondition(format!("π sends cell {i} to missing cell {t}"))
                })?;
                if positive && !cell.is_subset(container) {
                    return Err(Error::Precondition(format!(
                        "π sends positive-mass cell {i} to a non-containing cell {t}"
                    )));
                }
                Some(t)
            }
            None => q.cells().iter().position(|qc| cell.is_subset(qc)),
        };
        match target {
            Some(t) => {
                merged.entry(t).or_default().extend(cell.iter().copied());
            }
            None if positive => {
                return Err(Error::Precondition(format!(
                    "no family cell contains positive-mass partition cell {i}"
                )));
            }
            None => {} // zero-mass cell with no container contributes nothing
        }
    }
    let mut parts = BTreeMap::new();
    for (t, union) in merged {
        parts.insert(t, mu.restrict(&union)?);
    }
    Ok(Division::new_unchecked(q.clone(), parts))
}

/// The disjoint-peel construction: order the positive-mass cells by part
/// mass, nonincreasing (ties by ascending cell index), then take
/// P₁ = Q₁ and Pᵢ = Qᵢ \ (Q₁ ∪ … ∪ Qᵢ₋₁), dropping cells peeled to
/// nothing. The Hardy–Littlewood–Pólya inequality applied to the sorted
/// part masses against the peeled cell masses gives
/// `partition_entropy(μ, result) ≤ weighted_entropy(m)` at every α.
pub fn hlp_partition_from_division(m: &Division, mu: &DiscreteMeasure) -> Result<Partition> {
    let mut order = m.positive_cell_masses();
    order.sort_by(|(i, a), (j, b)| b.total_cmp(a).then(i.cmp(j)));

    let covered: BTreeSet<u32> = order
        .iter()
        .flat_map(|(i, _)| m.family().cells()[*i].iter().copied())
        .collect();
    let uncovered: f64 = mu
        .support()
        .filter(|(id, _)| !covered.contains(id))
        .map(|(_, w)| w)
        .sum();
    if uncovered > SET_MASS_EPS {
        return Err(Error::Precondition(format!(
            "positive-mass cells leave μ-mass {uncovered} uncovered"
        )));
    }

    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut peeled: Vec<BTreeSet<u32>> = Vec::new();
    for (i, _) in &order {
        let fresh: BTreeSet<u32> = m.family().cells()[*i]
            .iter()
            .filter(|id| !seen.contains(id))
            .copied()
            .collect();
        seen.extend(fresh.iter().copied());
        if !fresh.is_empty() {
            peeled.push(fresh);
        }
    }
    Partition::new(CellFamily::new(peeled, None)?, mu)
}

/// A Hardy–Littlewood–Pólya comparison instance: x nonincreasing, prefix
/// sums of x dominated by those of y, equal totals.
#[derive(Debug, Clone)]
pub struct MajorizationInstance {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl MajorizationInstance {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Input(
                "x and y must be nonempty sequences of equal length".into(),
            ));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input("entries must be finite and nonnegative".into()));
        }
        if x.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Input("x must be nonincreasing".into()));
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for (a, b) in x.iter().zip(&y) {
            sx += a;
            sy += b;
            if sx > sy + SET_MASS_EPS {
                return Err(Error::Input(format!(
                    "prefix sum of x exceeds prefix sum of y ({sx} > {sy})"
                )));
            }
        }
        if (sx - sy).abs() > SET_MASS_EPS {
            return Err(Error::Input(format!(
                "total sums differ: {sx} vs {sy}"
            )));
        }
        Ok(MajorizationInstance { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// The inequality direction of the Hardy–Littlewood–Pólya theorem for
/// φ(t) = tᵅ: Σxᵅ ≥ Σyᵅ in the concave regime α ∈ (0,1), Σxᵅ ≤ Σyᵅ in
/// the convex regime α > 1. Comparisons carry a relative 1e−12 slack.
pub fn majorization_check(inst: &MajorizationInstance, alpha: AlphaOrder) -> bool {
    let sx = power_sum_all(inst.x(), alpha);
    let sy = power_sum_all(inst.y(), alpha);
    let slack = SET_MASS_EPS * sx.abs().max(sy.abs()).max(1.0);
    if alpha.is_sub_one() {
        sx + slack >= sy
    } else {
        sx <= sy + slack
    }
}

fn power_sum_all(vals: &[f64], alpha: AlphaOrder) -> f64 {
    vals.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v.powf(alpha.value()))
        .sum()
}
