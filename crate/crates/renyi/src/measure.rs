//! Finitely supported measures over indexed atoms: restriction, mixtures,
//! and the mass bookkeeping everything else builds on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tol::{MASS_EPS, SET_MASS_EPS};

/// A point of the space: a stable integer id plus optional coordinates.
/// Coordinates are needed only by scale-dependent families (grids, balls).
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub id: u32,
    pub coords: Option<Vec<f64>>,
}

impl Atom {
    pub fn new(id: u32) -> Self {
        Atom { id, coords: None }
    }

    pub fn with_coords(id: u32, coords: Vec<f64>) -> Self {
        Atom {
            id,
            coords: Some(coords),
        }
    }
}

/// An immutable, validated list of atoms. Ids are unique; coordinates,
/// when present, are present on every atom with one common arity.
#[derive(Debug, PartialEq)]
pub struct AtomSpace {
    atoms: Vec<Atom>,
    index: HashMap<u32, usize>,
}

impl AtomSpace {
    pub fn new(atoms: Vec<Atom>) -> Result<Arc<Self>> {
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            if index.insert(atom.id, i).is_some() {
                return Err(Error::Input(format!("duplicate atom id {}", atom.id)));
            }
            if let Some(c) = &atom.coords {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Input(format!(
                        "non-finite coordinate on atom {}",
                        atom.id
                    )));
                }
            }
        }
        let arities: BTreeSet<Option<usize>> =
            atoms.iter().map(|a| a.coords.as_ref().map(Vec::len)).collect();
        if arities.len() > 1 {
            return Err(Error::Input(
                "atoms must all carry coordinates of one arity, or none at all".into(),
            ));
        }
        Ok(Arc::new(AtomSpace { atoms, index }))
    }

    /// Space of `n` coordinate-free atoms with ids `0..n`.
    pub fn indexed(n: u32) -> Arc<Self> {
        Self::new((0..n).map(Atom::new).collect()).expect("ids 0..n are unique")
    }

    /// Space of 1-d atoms with ids `0..n` at the given positions.
    pub fn line(positions: &[f64]) -> Result<Arc<Self>> {
        Self::new(
            positions
                .iter()
                .enumerate()
                .map(|(i, &x)| Atom::with_coords(i as u32, vec![x]))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains(&self, id: u32) -> bool {
        self.index.contains_key(&id)
    }

    /// Coordinate arity shared by all atoms, if coordinates are present.
    pub fn dim(&self) -> Option<usize> {
        self.atoms.first().and_then(|a| a.coords.as_ref().map(Vec::len))
    }

    pub fn coords_of(&self, id: u32) -> Result<&[f64]> {
        let i = self
            .index
            .get(&id)
            .ok_or_else(|| Error::Input(format!("unknown atom id {id}")))?;
        self.atoms[*i]
            .coords
            .as_deref()
            .ok_or_else(|| Error::Input(format!("atom {id} has no coordinates")))
    }
}

/// A finitely supported nonnegative measure: a weight per atom id.
/// Atoms absent from the map carry zero mass; zero-weight atoms stay in
/// the space but are ignored by entropy sums.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    space: Arc<AtomSpace>,
    weights: BTreeMap<u32, f64>,
}

impl DiscreteMeasure {
    pub fn new(space: Arc<AtomSpace>, weights: BTreeMap<u32, f64>) -> Result<Self> {
        for (&id, &w) in &weights {
            if !space.contains(id) {
                return Err(Error::Input(format!("weight on unknown atom id {id}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Input(format!("weight {w} on atom {id} is not a finite nonnegative real")));
            }
        }
        Ok(DiscreteMeasure { space, weights })
    }

    /// Builds a measure and checks it carries unit mass.
    pub fn probability(space: Arc<AtomSpace>, weights: BTreeMap<u32, f64>) -> Result<Self> {
        let mu = Self::new(space, weights)?;
        if !mu.is_probability() {
            return Err(Error::Input(format!(
                "total mass {} is not within {MASS_EPS} of 1",
                mu.total_mass()
            )));
        }
        Ok(mu)
    }

    /// Probability measure with the given weights on atom ids `0..n`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let space = AtomSpace::indexed(weights.len() as u32);
        let map = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as u32, w))
            .collect();
        Self::probability(space, map)
    }

    pub fn space(&self) -> &Arc<AtomSpace> {
        &self.space
    }

    pub fn same_space(&self, other: &DiscreteMeasure) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    pub fn weight(&self, id: u32) -> f64 {
        self.weights.get(&id).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_EPS
    }

    /// Atoms of strictly positive mass, in ascending id order.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(&id, &w)| (id, w))
    }

    pub fn support_ids(&self) -> BTreeSet<u32> {
        self.support().map(|(id, _)| id).collect()
    }

    /// Total mass of an explicit atom-id set.
    pub fn mass_of<'a>(&self, ids: impl IntoIterator<Item = &'a u32>) -> f64 {
        ids.into_iter().map(|&id| self.weight(id)).sum()
    }

    /// Restriction μ|_S: keeps the weight on `S`, zero elsewhere.
    pub fn restrict(&self, s: &BTreeSet<u32>) -> Result<DiscreteMeasure> {
        for &id in s {
            if !self.space.contains(id) {
                return Err(Error::Input(format!("restriction to unknown atom id {id}")));
            }
        }
        let weights = self
            .weights
            .iter()
            .filter(|(id, _)| s.contains(id))
            .map(|(&id, &w)| (id, w))
            .collect();
        Ok(DiscreteMeasure {
            space: Arc::clone(&self.space),
            weights,
        })
    }

    /// True when the two measures agree atomwise within `SET_MASS_EPS`.
    pub fn approx_eq(&self, other: &DiscreteMeasure) -> bool {
        if !self.same_space(other) {
            return false;
        }
        let ids: BTreeSet<u32> = self
            .weights
            .keys()
            .chain(other.weights.keys())
            .copied()
            .collect();
        ids.iter()
            .all(|&id| (self.weight(id) - other.weight(id)).abs() <= SET_MASS_EPS)
    }
}

/// A convex combination Σ aₖ·μₖ of probability measures on one atom space.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    components: Vec<(f64, DiscreteMeasure)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(f64, DiscreteMeasure)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Input("mixture needs at least one component".into()));
        }
        let total: f64 = components.iter().map(|(a, _)| a).sum();
        if components.iter().any(|(a, _)| !(0.0..=1.0).contains(a)) {
            return Err(Error::Input("mixture coefficients must lie in [0,1]".into()));
        }
        if (total - 1.0).abs() > MASS_EPS {
            return Err(Error::Input(format!(
                "mixture coefficients sum to {total}, not 1"
            )));
        }
        let first = &components[0].1;
        if !components.iter().all(|(_, mu)| mu.same_space(first)) {
            return Err(Error::Input(
                "mixture components must share one atom space".into(),
            ));
        }
        Ok(MixtureSpec { components })
    }

    pub fn components(&self) -> &[(f64, DiscreteMeasure)] {
        &self.components
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.components.iter().map(|(a, _)| *a).collect()
    }

    pub fn space(&self) -> &Arc<AtomSpace> {
        self.components[0].1.space()
    }
}

/// The mixture measure itself: weight(x) = Σₖ aₖ·μₖ(x).
pub fn mix(spec: &MixtureSpec) -> DiscreteMeasure {
    let space = Arc::clone(spec.space());
    let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
    for (a, mu) in spec.components() {
        for (id, w) in mu.support() {
            *weights.entry(id).or_insert(0.0) += a * w;
        }
    }
    DiscreteMeasure { space, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(n: u32) -> DiscreteMeasure {
        DiscreteMeasure::from_weights(&vec![1.0 / n as f64; n as usize]).unwrap()
    }

    fn dirac(space: &Arc<AtomSpace>, id: u32) -> DiscreteMeasure {
        DiscreteMeasure::probability(Arc::clone(space), BTreeMap::from([(id, 1.0)])).unwrap()
    }

    #[test]
    fn restrict_keeps_selected_mass() {
        let mu = uniform(3);
        let r = mu.restrict(&BTreeSet::from([0])).unwrap();
        assert_eq!(r.weight(0), 1.0 / 3.0);
        assert_eq!(r.weight(1), 0.0);
        assert!((r.total_mass() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn restrict_to_full_support_is_identity() {
        let mu = uniform(3);
        let r = mu.restrict(&mu.support_ids()).unwrap();
        assert!(r.approx_eq(&mu));
    }

    #[test]
    fn restrict_direct_evaluation() {
        let mu = DiscreteMeasure::from_weights(&[0.5, 0.25, 0.25]).unwrap();
        let r = mu.restrict(&BTreeSet::from([1, 2])).unwrap();
        assert_eq!(r.weight(1), 0.25);
        assert_eq!(r.weight(2), 0.25);
        assert!((r.total_mass() - 0.5).abs() < 1e-15);
        assert!(!r.is_probability());
    }

    #[test]
    fn restrict_unknown_id_is_input_error() {
        let mu = uniform(2);
        assert!(matches!(
            mu.restrict(&BTreeSet::from([7])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn mix_of_two_diracs() {
        let space = AtomSpace::indexed(2);
        let spec = MixtureSpec::new(vec![
            (0.5, dirac(&space, 0)),
            (0.5, dirac(&space, 1)),
        ])
        .unwrap();
        let mu = mix(&spec);
        assert_eq!(mu.weight(0), 0.5);
        assert_eq!(mu.weight(1), 0.5);
        assert!(mu.is_probability());
    }

    #[test]
    fn mix_single_component_is_identity() {
        let mu = DiscreteMeasure::from_weights(&[0.2, 0.8]).unwrap();
        let spec = MixtureSpec::new(vec![(1.0, mu.clone())]).unwrap();
        assert!(mix(&spec).approx_eq(&mu));
    }

    #[test]
    fn mix_direct_evaluation() {
        let space = AtomSpace::indexed(2);
        let u = DiscreteMeasure::probability(
            Arc::clone(&space),
            BTreeMap::from([(0, 0.5), (1, 0.5)]),
        )
        .unwrap();
        let spec = MixtureSpec::new(vec![(0.3, dirac(&space, 0)), (0.7, u)]).unwrap();
        let mu = mix(&spec);
        assert!((mu.weight(0) - 0.65).abs() < 1e-15);
        assert!((mu.weight(1) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn mix_rejects_mismatched_spaces_and_bad_simplex() {
        let a = uniform(2);
        let b = uniform(3);
        assert!(matches!(
            MixtureSpec::new(vec![(0.5, a.clone()), (0.5, b)]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            MixtureSpec::new(vec![(0.6, a.clone()), (0.6, a)]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn space_rejects_duplicate_ids_and_mixed_arity() {
        assert!(AtomSpace::new(vec![Atom::new(0), Atom::new(0)]).is_err());
        assert!(AtomSpace::new(vec![
            Atom::with_coords(0, vec![0.0]),
            Atom::with_coords(1, vec![0.0, 1.0]),
        ])
        .is_err());
        assert!(AtomSpace::new(vec![Atom::with_coords(0, vec![0.0]), Atom::new(1)]).is_err());
    }

    proptest! {
        // Convex combinations flatten: mixing a mixture equals mixing the
        // flattened coefficient list, atomwise within 1e-12.
        #[test]
        fn mix_is_associative(ws in proptest::collection::vec(0.05..1.0f64, 4),
                              a in 0.05..0.95f64, b in 0.05..0.95f64) {
            let space = AtomSpace::indexed(4);
            let norm: f64 = ws.iter().sum();
            let mus: Vec<DiscreteMeasure> = (0..4).map(|k| {
                let mut m = BTreeMap::new();
                for (i, &w) in ws.iter().enumerate() {
                    m.insert(((i + k) % 4) as u32, w / norm);
                }
                DiscreteMeasure::probability(Arc::clone(&space), m).unwrap()
            }).collect();

            let inner = mix(&MixtureSpec::new(vec![
                (b, mus[0].clone()), (1.0 - b, mus[1].clone())]).unwrap());
            let nested = mix(&MixtureSpec::new(vec![
                (a, inner), (1.0 - a, mus[2].clone())]).unwrap());
            let flat = mix(&MixtureSpec::new(vec![
                (a * b, mus[0].clone()),
                (a * (1.0 - b), mus[1].clone()),
                (1.0 - a, mus[2].clone())]).unwrap());
            prop_assert!(nested.approx_eq(&flat));
        }

        // Restriction splits total mass between a set and its complement.
        #[test]
        fn restrict_splits_mass(ws in proptest::collection::vec(0.0..1.0f64, 6),
                                mask in 0u32..64) {
            let total: f64 = ws.iter().sum();
            prop_assume!(total > 0.1);
            let space = AtomSpace::indexed(6);
            let m = ws.iter().enumerate().map(|(i, &w)| (i as u32, w / total)).collect();
            let mu = DiscreteMeasure::probability(Arc::clone(&space), m).unwrap();
            let s: BTreeSet<u32> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
            let comp: BTreeSet<u32> = (0..6).filter(|i| !s.contains(i)).collect();
            let split = mu.restrict(&s).unwrap().total_mass()
                + mu.restrict(&comp).unwrap().total_mass();
            prop_assert!((split - mu.total_mass()).abs() <= 1e-12);
        }
    }
}
