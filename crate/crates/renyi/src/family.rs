//! Error-control families Q, μ-partitions P, the acceptability relation
//! P ≺ Q, and the grid/ball family generators.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::measure::{AtomSpace, DiscreteMeasure};
use crate::tol::SET_MASS_EPS;

/// An indexed family of atom-id sets. Cells may overlap and may carry zero
/// mass; indices are stable and meaningful (divisions refer to them).
#[derive(Debug, Clone, PartialEq)]
pub struct CellFamily {
    cells: Vec<BTreeSet<u32>>,
    label: Option<String>,
}

impl CellFamily {
    pub fn new(cells: Vec<BTreeSet<u32>>, label: Option<String>) -> Result<Self> {
        if cells.iter().any(BTreeSet::is_empty) {
            return Err(Error::Input("family cells must be nonempty sets".into()));
        }
        Ok(CellFamily { cells, label })
    }

    /// Family from plain id lists, for tests and JSON input.
    pub fn from_lists(cells: &[&[u32]]) -> Result<Self> {
        Self::new(
            cells.iter().map(|c| c.iter().copied().collect()).collect(),
            None,
        )
    }

    pub fn cells(&self) -> &[BTreeSet<u32>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Indices of the cells containing `id`, ascending.
    pub fn cells_containing(&self, id: u32) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&id))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn are_cells_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        for cell in &self.cells {
            for id in cell {
                if !seen.insert(*id) {
                    return false;
                }
            }
        }
        true
    }
}

/// True iff the family's cells are pairwise disjoint and the atoms left
/// uncovered carry total μ-mass ≤ `SET_MASS_EPS`.
pub fn is_mu_partition(family: &CellFamily, mu: &DiscreteMeasure) -> bool {
    if !family.are_cells_disjoint() {
        return false;
    }
    let covered: BTreeSet<u32> = family.cells.iter().flatten().copied().collect();
    let uncovered: f64 = mu
        .support()
        .filter(|(id, _)| !covered.contains(id))
        .map(|(_, w)| w)
        .sum();
    uncovered <= SET_MASS_EPS
}

/// A family checked to be a μ-partition of a specific measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    family: CellFamily,
}

impl Partition {
    /// Validates the family against μ; non-partitions are rejected.
    pub fn new(family: CellFamily, mu: &DiscreteMeasure) -> Result<Self> {
        if !is_mu_partition(&family, mu) {
            return Err(Error::Precondition(
                "cell family is not a μ-partition (overlap or uncovered mass)".into(),
            ));
        }
        Ok(Partition { family })
    }

    pub fn family(&self) -> &CellFamily {
        &self.family
    }

    pub fn cells(&self) -> &[BTreeSet<u32>] {
        self.family.cells()
    }

    /// Positive cell masses under μ, in cell order.
    pub fn positive_masses(&self, mu: &DiscreteMeasure) -> Vec<f64> {
        self.cells()
            .iter()
            .map(|c| mu.mass_of(c))
            .filter(|&m| m > 0.0)
            .collect()
    }
}

/// P ≺ Q: every P-cell of positive μ-mass sits inside some Q-cell.
pub fn refines(p: &Partition, q: &CellFamily, mu: &DiscreteMeasure) -> bool {
    p.cells()
        .iter()
        .filter(|cell| mu.mass_of(*cell) > 0.0)
        .all(|cell| q.cells().iter().any(|qc| cell.is_subset(qc)))
}

/// Buckets atoms by `floor(coord/δ)` per axis. The result is always a
/// partition of the atoms; cells are ordered by lexicographic bucket index.
pub fn grid_family(space: &AtomSpace, delta: f64) -> Result<CellFamily> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Input(format!("grid δ must be positive, got {delta}")));
    }
    if space.dim().is_none() {
        return Err(Error::Input("grid family needs atom coordinates".into()));
    }
    let mut buckets: BTreeMap<Vec<i64>, BTreeSet<u32>> = BTreeMap::new();
    for atom in space.atoms() {
        let coords = atom.coords.as_ref().expect("uniform arity checked by space");
        let key: Vec<i64> = coords.iter().map(|&x| (x / delta).floor() as i64).collect();
        buckets.entry(key).or_default().insert(atom.id);
    }
    CellFamily::new(buckets.into_values().collect(), None)
}

/// One cell per center: the atoms within Euclidean distance ≤ δ. Cells may
/// overlap; centers covering no atom are dropped (cells must be nonempty).
pub fn ball_family(space: &AtomSpace, delta: f64, centers: &[Vec<f64>]) -> Result<CellFamily> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Input(format!("ball δ must be positive, got {delta}")));
    }
    let dim = space
        .dim()
        .ok_or_else(|| Error::Input("ball family needs atom coordinates".into()))?;
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::Input(format!("centers must have arity {dim}")));
    }
    let mut cells = Vec::new();
    for center in centers {
        let cell: BTreeSet<u32> = space
            .atoms()
            .iter()
            .filter(|a| {
                let coords = a.coords.as_ref().expect("uniform arity checked by space");
                let d2: f64 = coords
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum();
                d2.sqrt() <= delta
            })
            .map(|a| a.id)
            .collect();
        if !cell.is_empty() {
            cells.push(cell);
        }
    }
    CellFamily::new(cells, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DiscreteMeasure;

    fn uniform(n: u32) -> DiscreteMeasure {
        DiscreteMeasure::from_weights(&vec![1.0 / n as f64; n as usize]).unwrap()
    }

    #[test]
    fn singleton_cells_partition_uniform_pair() {
        let p = CellFamily::from_lists(&[&[0], &[1]]).unwrap();
        assert!(is_mu_partition(&p, &uniform(2)));
    }

    #[test]
    fn overlapping_cells_are_not_a_partition() {
        let p = CellFamily::from_lists(&[&[0, 1], &[1]]).unwrap();
        assert!(!is_mu_partition(&p, &uniform(2)));
    }

    #[test]
    fn uncovered_mass_blocks_partition() {
        let p = CellFamily::from_lists(&[&[0]]).unwrap();
        assert!(!is_mu_partition(&p, &uniform(2)));
    }

    #[test]
    fn zero_mass_atoms_may_stay_uncovered() {
        let mu = DiscreteMeasure::from_weights(&[1.0, 0.0]).unwrap();
        let p = CellFamily::from_lists(&[&[0]]).unwrap();
        assert!(is_mu_partition(&p, &mu));
    }

    #[test]
    fn refines_subset_cases() {
        let mu = uniform(3);
        let p = Partition::new(CellFamily::from_lists(&[&[0], &[1], &[2]]).unwrap(), &mu).unwrap();
        let q = CellFamily::from_lists(&[&[0, 1, 2]]).unwrap();
        assert!(refines(&p, &q, &mu));

        let mu2 = uniform(2);
        let coarse =
            Partition::new(CellFamily::from_lists(&[&[0, 1]]).unwrap(), &mu2).unwrap();
        let fine = CellFamily::from_lists(&[&[0], &[1]]).unwrap();
        assert!(!refines(&coarse, &fine, &mu2));
    }

    #[test]
    fn refines_overlapping_family() {
        let mu = uniform(3);
        let p =
            Partition::new(CellFamily::from_lists(&[&[0], &[1, 2]]).unwrap(), &mu).unwrap();
        let q = CellFamily::from_lists(&[&[0, 1], &[1, 2]]).unwrap();
        assert!(refines(&p, &q, &mu));
    }

    #[test]
    fn refines_is_reflexive_and_transitive_on_chain() {
        let mu = uniform(4);
        let p = Partition::new(
            CellFamily::from_lists(&[&[0], &[1], &[2, 3]]).unwrap(),
            &mu,
        )
        .unwrap();
        assert!(refines(&p, p.family(), &mu));
        let q_tilde = CellFamily::from_lists(&[&[0, 1], &[2, 3]]).unwrap();
        let q = CellFamily::from_lists(&[&[0, 1], &[2, 3], &[1, 2]]).unwrap();
        let q_tilde_p = Partition::new(q_tilde.clone(), &mu).unwrap();
        assert!(refines(&p, &q_tilde, &mu));
        assert!(refines(&q_tilde_p, &q, &mu));
        assert!(refines(&p, &q, &mu));
    }

    #[test]
    fn grid_buckets_atoms() {
        let space = AtomSpace::line(&[0.1, 0.6]).unwrap();
        let fam = grid_family(&space, 0.5).unwrap();
        assert_eq!(fam.len(), 2);

        let fam_one = grid_family(&space, 2.0).unwrap();
        assert_eq!(fam_one.len(), 1);
        assert_eq!(fam_one.cells()[0].len(), 2);
    }

    #[test]
    fn grid_on_cantor_depth_two() {
        // Occupied triadic buckets at depth 2 are 0, 2, 6, 8 out of 9.
        let space = AtomSpace::line(&[
            0.5 / 9.0,
            2.0 / 9.0 + 0.5 / 9.0,
            6.0 / 9.0 + 0.5 / 9.0,
            8.0 / 9.0 + 0.5 / 9.0,
        ])
        .unwrap();
        let fam = grid_family(&space, 1.0 / 9.0).unwrap();
        assert_eq!(fam.len(), 4);
        assert!(fam.cells().iter().all(|c| c.len() == 1));
        assert!(fam.are_cells_disjoint());
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        let space = AtomSpace::line(&[0.0]).unwrap();
        assert!(grid_family(&space, 0.0).is_err());
        let bare = AtomSpace::indexed(2);
        assert!(grid_family(&bare, 0.5).is_err());
    }

    #[test]
    fn ball_family_distance_check() {
        let space = AtomSpace::line(&[0.0, 0.4, 1.0]).unwrap();
        let fam = ball_family(&space, 0.5, &[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.cells()[0], BTreeSet::from([0, 1]));
        assert_eq!(fam.cells()[1], BTreeSet::from([2]));
    }

    #[test]
    fn ball_family_singletons_and_full_cover() {
        let space = AtomSpace::line(&[0.0, 1.0, 2.0]).unwrap();
        let singles = ball_family(
            &space,
            0.4,
            &[vec![0.0], vec![1.0], vec![2.0]],
        )
        .unwrap();
        assert!(singles.cells().iter().all(|c| c.len() == 1));

        let full = ball_family(&space, 5.0, &[vec![1.0]]).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full.cells()[0].len(), 3);
    }
}
