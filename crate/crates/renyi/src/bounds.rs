//! The sandwich bounds on the entropy of a mixture Σ aₖμₖ, expressed as
//! quasi-arithmetic means of the component entropies through the g_α
//! transform, plus the α→1 Shannon-limit check.

use crate::entropy::{g_alpha, g_alpha_inv, AlphaOrder, EntropyValue};
use crate::error::{Error, Result};
use crate::family::CellFamily;
use crate::measure::{mix, MixtureSpec};
use crate::search::{classical_entropy_exact, SearchMethod};
use crate::tol::MASS_EPS;

/// The two bounds around an (optionally computed) exact mixture entropy.
/// `certified` records that every entropy involved came from exhaustive
/// search rather than a heuristic upper bound.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub alpha: AlphaOrder,
    pub coefficients: Vec<f64>,
    pub component_entropies: Vec<EntropyValue>,
    pub lower: EntropyValue,
    pub upper: EntropyValue,
    pub actual: Option<EntropyValue>,
    pub certified: bool,
}

fn check_weights(entropies: &[EntropyValue], coeffs: &[f64]) -> Result<()> {
    if entropies.len() != coeffs.len() || coeffs.is_empty() {
        return Err(Error::Input(
            "entropies and coefficients must be nonempty lists of equal length".into(),
        ));
    }
    if coeffs.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Input("coefficients must lie in [0,1]".into()));
    }
    let total: f64 = coeffs.iter().sum();
    if (total - 1.0).abs() > MASS_EPS {
        return Err(Error::Input(format!(
            "coefficients sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Shared evaluator: g⁻¹(Σ wₖ·g(Hₖ)) with caller-supplied outer weights
/// (aₖ for the lower bound, aₖᵅ for the upper). A component with positive
/// coefficient and infinite entropy makes the whole mixture entropy
/// infinite, so both bounds short-circuit to ∞; zero-coefficient
/// components are ignored.
fn quasi_mean(
    entropies: &[EntropyValue],
    coeffs: &[f64],
    alpha: AlphaOrder,
    weight: impl Fn(f64) -> f64,
) -> Result<EntropyValue> {
    check_weights(entropies, coeffs)?;
    let mut sum = 0.0;
    for (h, &a) in entropies.iter().zip(coeffs) {
        if a == 0.0 {
            continue;
        }
        match h {
            EntropyValue::Infinite => return Ok(EntropyValue::Infinite),
            EntropyValue::Finite(bits) => sum += weight(a) * g_alpha(*bits, alpha),
        }
    }
    Ok(EntropyValue::Finite(g_alpha_inv(sum, alpha)?))
}

/// H_α(Σaₖμₖ;Q) ≥ g⁻¹[Σ aₖ·g(Hₖ)] — the quasi-arithmetic mean of the
/// component entropies.
pub fn mixture_lower_bound(
    entropies: &[EntropyValue],
    coeffs: &[f64],
    alpha: AlphaOrder,
) -> Result<EntropyValue> {
    quasi_mean(entropies, coeffs, alpha, |a| a)
}

/// H_α(Σaₖμₖ;Q) ≤ g⁻¹[Σ aₖᵅ·g(Hₖ)] — the coefficients gain the power α.
pub fn mixture_upper_bound(
    entropies: &[EntropyValue],
    coeffs: &[f64],
    alpha: AlphaOrder,
) -> Result<EntropyValue> {
    quasi_mean(entropies, coeffs, alpha, |a| a.powf(alpha.value()))
}

/// True when `lower − tol ≤ actual ≤ upper + tol` in the extended reals.
pub fn sandwich_holds(
    lower: &EntropyValue,
    actual: &EntropyValue,
    upper: &EntropyValue,
    tol: f64,
) -> bool {
    let lower_ok = match (lower, actual) {
        (EntropyValue::Finite(l), EntropyValue::Finite(a)) => *l - tol <= *a,
        (EntropyValue::Infinite, EntropyValue::Finite(_)) => false,
        _ => true,
    };
    let upper_ok = match (actual, upper) {
        (EntropyValue::Finite(a), EntropyValue::Finite(u)) => *a <= *u + tol,
        (EntropyValue::Infinite, EntropyValue::Finite(_)) => false,
        _ => true,
    };
    lower_ok && upper_ok
}

/// Computes H_α(μₖ;Q) for every component and H_α of the mixture itself by
/// exhaustive search, then checks the sandwich within 1e−9. A violation —
/// which no valid input can produce — is a verification error.
pub fn verify_mixture_bounds(
    spec: &MixtureSpec,
    q: &CellFamily,
    alpha: AlphaOrder,
) -> Result<BoundReport> {
    let coefficients = spec.coefficients();
    let mut component_entropies = Vec::with_capacity(spec.components().len());
    let mut certified = true;
    for (_, mu_k) in spec.components() {
        let r = classical_entropy_exact(mu_k, q, alpha)?;
        certified &= matches!(r.method, SearchMethod::Exhaustive | SearchMethod::Infinite);
        component_entropies.push(r.value);
    }
    let mixture = mix(spec);
    let actual = classical_entropy_exact(&mixture, q, alpha)?.value;

    let lower = mixture_lower_bound(&component_entropies, &coefficients, alpha)?;
    let upper = mixture_upper_bound(&component_entropies, &coefficients, alpha)?;
    if !sandwich_holds(&lower, &actual, &upper, 1e-9) {
        return Err(Error::Verification(format!(
            "mixture entropy escapes its bounds: lower={lower:?}, actual={actual:?}, upper={upper:?}"
        )));
    }
    Ok(BoundReport {
        alpha,
        coefficients,
        component_entropies,
        lower,
        upper,
        actual: Some(actual),
        certified,
    })
}

/// One evaluation of the bound pair along an α-sequence.
#[derive(Debug, Clone, Copy)]
pub struct ShannonLimitRow {
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Evaluates (l_α, u_α) for finite component entropies along `alphas`,
/// for checking convergence to the Shannon-mixture bounds as α→1. Values
/// of α inside the guard band (including 1 itself) are input errors.
pub fn shannon_limit_check(
    entropies: &[f64],
    coeffs: &[f64],
    alphas: &[f64],
) -> Result<Vec<ShannonLimitRow>> {
    if entropies.iter().any(|h| !h.is_finite()) {
        return Err(Error::Input("component entropies must be finite".into()));
    }
    let values: Vec<EntropyValue> = entropies.iter().map(|&h| EntropyValue::Finite(h)).collect();
    alphas
        .iter()
        .map(|&a| {
            let alpha = AlphaOrder::new(a)?;
            let lower = mixture_lower_bound(&values, coeffs, alpha)?;
            let upper = mixture_upper_bound(&values, coeffs, alpha)?;
            Ok(ShannonLimitRow {
                alpha: a,
                lower: lower.bits().expect("finite inputs give finite bounds"),
                upper: upper.bits().expect("finite inputs give finite bounds"),
            })
        })
        .collect()
}
