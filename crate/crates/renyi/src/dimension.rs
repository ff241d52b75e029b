//! Rényi entropy dimension of order α: entropy-vs-scale regression over a
//! ladder of grid (or ball) families, generators for self-similar test
//! measures, and the max/min rule check for mixtures.

use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{mixture_lower_bound, mixture_upper_bound, sandwich_holds};
use crate::entropy::{profile_entropy, AlphaOrder, EntropyValue};
use crate::error::{Error, Result};
use crate::family::ball_family;
use crate::measure::{mix, Atom, AtomSpace, DiscreteMeasure, MixtureSpec};
use crate::search::classical_entropy_exact;
use crate::tol::{DIM_TOL, ENUM_BUDGET, MASS_EPS};

/// Which family realizes the scale δ: disjoint grid cells (the computable
/// stand-in whose bounded discrepancy from true balls vanishes in the
/// log-log slope) or closed balls around explicit centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Grid,
    Balls,
}

/// A strictly decreasing list of at least three scales δ > 0.
#[derive(Debug, Clone)]
pub struct DeltaLadder {
    scales: Vec<f64>,
    kind: FamilyKind,
}

impl DeltaLadder {
    pub fn new(scales: Vec<f64>, kind: FamilyKind) -> Result<Self> {
        if scales.len() < 3 {
            return Err(Error::Input("a ladder needs at least 3 scales".into()));
        }
        if scales.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Input("ladder scales must be positive reals".into()));
        }
        if scales.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Input("ladder scales must be strictly decreasing".into()));
        }
        Ok(DeltaLadder { scales, kind })
    }

    /// Scales base^−k for k = lo..=hi.
    pub fn geometric(base: f64, lo: u32, hi: u32, kind: FamilyKind) -> Result<Self> {
        if base.is_nan() || base <= 1.0 || lo > hi {
            return Err(Error::Input(format!(
                "geometric ladder needs base > 1 and lo ≤ hi, got base {base}, {lo}..{hi}"
            )));
        }
        Self::new(
            (lo..=hi).map(|k| base.powi(-(k as i32))).collect(),
            kind,
        )
    }

    pub fn dyadic(lo: u32, hi: u32) -> Result<Self> {
        Self::geometric(2.0, lo, hi, FamilyKind::Grid)
    }

    pub fn triadic(lo: u32, hi: u32) -> Result<Self> {
        Self::geometric(3.0, lo, hi, FamilyKind::Grid)
    }

    /// The ladder aligned to a measure generated at depth `depth`:
    /// k ∈ [⌈depth/3⌉, depth], avoiding the plateau once δ falls below the
    /// atom spacing.
    pub fn aligned(base: f64, depth: u32, kind: FamilyKind) -> Result<Self> {
        Self::geometric(base, depth.div_ceil(3), depth, kind)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }
}

/// H_α(μ; grid δ): atoms bucketed by floor(coord/δ) per axis. Grid cells
/// are disjoint, so no search is needed and the value is exact.
pub fn entropy_at_scale(
    mu: &DiscreteMeasure,
    delta: f64,
    alpha: AlphaOrder,
) -> Result<EntropyValue> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Input(format!("scale δ must be positive, got {delta}")));
    }
    let mut buckets: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (id, w) in mu.support() {
        let coords = mu.space().coords_of(id)?;
        let key: Vec<i64> = coords.iter().map(|&x| (x / delta).floor() as i64).collect();
        *buckets.entry(key).or_insert(0.0) += w;
    }
    Ok(EntropyValue::Finite(profile_entropy(
        buckets.into_values(),
        alpha,
    )))
}

/// H_α(μ; B_δ) with closed balls centered at every atom of the space —
/// the finite-center surrogate for balls around every point. Ball cells
/// overlap, so this goes through the exhaustive search and inherits its
/// budget.
pub fn entropy_at_scale_balls(
    mu: &DiscreteMeasure,
    delta: f64,
    alpha: AlphaOrder,
) -> Result<EntropyValue> {
    let centers: Vec<Vec<f64>> = mu
        .space()
        .atoms()
        .iter()
        .map(|a| {
            a.coords
                .clone()
                .ok_or_else(|| Error::Input(format!("atom {} has no coordinates", a.id)))
        })
        .collect::<Result<_>>()?;
    let family = ball_family(mu.space(), delta, &centers)?;
    Ok(classical_entropy_exact(mu, &family, alpha)?.value)
}

/// A fitted dimension: the least-squares slope of H_α(δ) against −log₂ δ,
/// with max/min two-point slopes as finite-scale stand-ins for the
/// limsup/liminf dimensions.
#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square regression residual over the finite points.
    pub residual: f64,
    pub upper_proxy: f64,
    pub lower_proxy: f64,
    pub per_scale: Vec<(f64, EntropyValue)>,
}

fn scale_entropy(
    mu: &DiscreteMeasure,
    kind: FamilyKind,
    delta: f64,
    alpha: AlphaOrder,
) -> Result<(f64, EntropyValue)> {
    let h = match kind {
        FamilyKind::Grid => entropy_at_scale(mu, delta, alpha)?,
        FamilyKind::Balls => entropy_at_scale_balls(mu, delta, alpha)?,
    };
    Ok((delta, h))
}

fn per_scale_entropies(
    mu: &DiscreteMeasure,
    ladder: &DeltaLadder,
    alpha: AlphaOrder,
) -> Result<Vec<(f64, EntropyValue)>> {
    #[cfg(feature = "parallel")]
    {
        ladder
            .scales()
            .par_iter()
            .map(|&d| scale_entropy(mu, ladder.kind(), d, alpha))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ladder
            .scales()
            .iter()
            .map(|&d| scale_entropy(mu, ladder.kind(), d, alpha))
            .collect()
    }
}

fn fit(points: &[(f64, EntropyValue)]) -> Result<DimensionEstimate> {
    let finite: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|(d, h)| h.bits().map(|b| (-d.log2(), b)))
        .collect();
    if finite.len() < 3 {
        return Err(Error::Estimation(format!(
            "{} finite entropy points, need at least 3",
            finite.len()
        )));
    }
    let n = finite.len() as f64;
    let xbar = finite.iter().map(|(x, _)| x).sum::<f64>() / n;
    let ybar = finite.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = finite.iter().map(|(x, _)| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = finite.iter().map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual = (finite
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let mut upper_proxy = f64::NEG_INFINITY;
    let mut lower_proxy = f64::INFINITY;
    for w in finite.windows(2) {
        let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        upper_proxy = upper_proxy.max(s);
        lower_proxy = lower_proxy.min(s);
    }
    Ok(DimensionEstimate {
        slope,
        intercept,
        residual,
        upper_proxy,
        lower_proxy,
        per_scale: points.to_vec(),
    })
}

/// Least-squares dimension estimate of μ over the ladder. Scales whose
/// entropy is infinite are dropped; fewer than three finite points is an
/// estimation error.
pub fn estimate_dimension(
    mu: &DiscreteMeasure,
    ladder: &DeltaLadder,
    alpha: AlphaOrder,
) -> Result<DimensionEstimate> {
    fit(&per_scale_entropies(mu, ladder, alpha)?)
}

/// Sequential twin of [`estimate_dimension`] (sequential over scales; a
/// balls-kind ladder still inherits the search's own parallelism).
pub mod seq {
    use super::*;

    pub fn estimate_dimension(
        mu: &DiscreteMeasure,
        ladder: &DeltaLadder,
        alpha: AlphaOrder,
    ) -> Result<DimensionEstimate> {
        let points = ladder
            .scales()
            .iter()
            .map(|&d| scale_entropy(mu, ladder.kind(), d, alpha))
            .collect::<Result<Vec<_>>>()?;
        fit(&points)
    }
}

/// One contraction x ↦ ratio·x + offset of the line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsMap {
    pub ratio: f64,
    pub offset: f64,
}

/// An iterated function system with selection probabilities, truncated at
/// a composition depth: the generator of self-similar test measures.
#[derive(Debug, Clone)]
pub struct IfsSpec {
    maps: Vec<IfsMap>,
    probs: Vec<f64>,
    depth: u32,
}

impl IfsSpec {
    pub fn new(maps: Vec<IfsMap>, probs: Vec<f64>, depth: u32) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Input("an IFS needs at least one map".into()));
        }
        if maps
            .iter()
            .any(|m| !(m.ratio > 0.0 && m.ratio < 1.0) || !m.offset.is_finite())
        {
            return Err(Error::Input(
                "contraction ratios must lie in (0,1) with finite offsets".into(),
            ));
        }
        if probs.len() != maps.len() {
            return Err(Error::Input("one probability per map is required".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Input("probabilities must lie in [0,1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_EPS {
            return Err(Error::Input(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if depth == 0 {
            return Err(Error::Input("depth must be at least 1".into()));
        }
        let count = (maps.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
        if count > ENUM_BUDGET as u128 {
            return Err(Error::Input(format!(
                "depth {depth} over {} maps generates {count} atoms, beyond {ENUM_BUDGET}",
                maps.len()
            )));
        }
        Ok(IfsSpec { maps, probs, depth })
    }

    pub fn maps(&self) -> &[IfsMap] {
        &self.maps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// True when two map images of [0,1] overlap on an interval (touching
    /// endpoints do not count). Dimension theory degrades on overlapping
    /// systems, so generation flags rather than forbids this.
    pub fn has_overlapping_maps(&self) -> bool {
        let mut spans: Vec<(f64, f64)> = self
            .maps
            .iter()
            .map(|m| (m.offset, m.offset + m.ratio))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        spans
            .windows(2)
            .any(|w| w[0].1 > w[1].0 + crate::tol::SET_MASS_EPS)
    }
}

/// The depth-level cylinder measure of the IFS: one atom per symbol word
/// w₁…w_D (in word-lexicographic order, which is atom-id order) at the
/// cylinder midpoint f_{w₁}∘…∘f_{w_D}(1/2), carrying weight Π p_{wᵢ}.
/// Zero-probability words keep their atoms with zero weight.
pub fn generate_ifs_measure(spec: &IfsSpec) -> Result<DiscreteMeasure> {
    let m = spec.maps.len() as u64;
    let count = m.pow(spec.depth);
    let mut atoms = Vec::with_capacity(count as usize);
    let mut weights = BTreeMap::new();
    for word in 0..count {
        let mut digits = Vec::with_capacity(spec.depth as usize);
        let mut rem = word;
        for _ in 0..spec.depth {
            digits.push((rem % m) as usize);
            rem /= m;
        }
        digits.reverse(); // w₁ first
        let mut x = 0.5;
        let mut weight = 1.0;
        for &d in digits.iter().rev() {
            // innermost map first
            x = spec.maps[d].ratio * x + spec.maps[d].offset;
        }
        for &d in &digits {
            weight *= spec.probs[d];
        }
        atoms.push(Atom::with_coords(word as u32, vec![x]));
        weights.insert(word as u32, weight);
    }
    DiscreteMeasure::probability(AtomSpace::new(atoms)?, weights)
}

/// The equal-weight middle-thirds Cantor measure at the given depth.
pub fn cantor_measure(depth: u32) -> Result<DiscreteMeasure> {
    let third = 1.0 / 3.0;
    generate_ifs_measure(&IfsSpec::new(
        vec![
            IfsMap { ratio: third, offset: 0.0 },
            IfsMap { ratio: third, offset: 2.0 / 3.0 },
        ],
        vec![0.5, 0.5],
        depth,
    )?)
}

/// The uniform measure on the 2^depth dyadic midpoints of [0,1].
pub fn uniform_dyadic_measure(depth: u32) -> Result<DiscreteMeasure> {
    generate_ifs_measure(&IfsSpec::new(
        vec![
            IfsMap { ratio: 0.5, offset: 0.0 },
            IfsMap { ratio: 0.5, offset: 0.5 },
        ],
        vec![0.5, 0.5],
        depth,
    )?)
}

/// Which component-slope rule the α regime selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DimRule {
    Max,
    Min,
}

/// Outcome of the mixture-dimension rule check.
#[derive(Debug, Clone)]
pub struct MixtureDimensionReport {
    pub alpha: AlphaOrder,
    pub rule: DimRule,
    pub components: Vec<DimensionEstimate>,
    pub mixture: DimensionEstimate,
    /// Max (α<1) or min (α>1) of the component slopes.
    pub expected: f64,
    /// |mixture slope − expected|.
    pub gap: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Whether H_α(mix;δ) sits between the mixture bounds built from the
    /// component entropies at every ladder scale.
    pub sandwich_at_scales: bool,
}

/// Estimates the dimension of each component and of the mixture, then
/// checks the mixture slope against the max rule (α<1) or min rule (α>1)
/// within `tolerance` (default 0.02). Also verifies the per-scale
/// entropy sandwich that drives the rule.
pub fn mixture_dimension_check(
    spec: &MixtureSpec,
    ladder: &DeltaLadder,
    alpha: AlphaOrder,
    tolerance: Option<f64>,
) -> Result<MixtureDimensionReport> {
    let tolerance = tolerance.unwrap_or(DIM_TOL);
    let components: Vec<DimensionEstimate> = spec
        .components()
        .iter()
        .map(|(_, mu)| estimate_dimension(mu, ladder, alpha))
        .collect::<Result<_>>()?;
    let mixture_measure = mix(spec);
    let mixture = estimate_dimension(&mixture_measure, ladder, alpha)?;

    let rule = if alpha.is_sub_one() { DimRule::Max } else { DimRule::Min };
    let expected = components
        .iter()
        .map(|c| c.slope)
        .fold(None::<f64>, |acc, s| {
            Some(match (acc, rule) {
                (None, _) => s,
                (Some(a), DimRule::Max) => a.max(s),
                (Some(a), DimRule::Min) => a.min(s),
            })
        })
        .expect("mixtures have at least one component");
    let gap = (mixture.slope - expected).abs();

    let coeffs = spec.coefficients();
    let mut sandwich_at_scales = true;
    for (i, (_, h_mix)) in mixture.per_scale.iter().enumerate() {
        let hs: Vec<EntropyValue> = components.iter().map(|c| c.per_scale[i].1).collect();
        let lower = mixture_lower_bound(&hs, &coeffs, alpha)?;
        let upper = mixture_upper_bound(&hs, &coeffs, alpha)?;
        sandwich_at_scales &= sandwich_holds(&lower, h_mix, &upper, 1e-9);
    }

    Ok(MixtureDimensionReport {
        alpha,
        rule,
        components,
        mixture,
        expected,
        gap,
        tolerance,
        holds: gap <= tolerance,
        sandwich_at_scales,
    })
}
