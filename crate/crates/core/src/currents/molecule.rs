use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Tolerance on the total weight of a molecule.
pub const BALANCE_TOL: f64 = 1e-9;

/// Something atoms can sit on: a vertex index or a point of the plane.
pub trait AtomPoint: Copy + Debug + PartialEq {
    type Key: Ord + Copy;
    fn atom_key(&self) -> Self::Key;
}

impl AtomPoint for usize {
    type Key = usize;
    fn atom_key(&self) -> usize {
        *self
    }
}

impl AtomPoint for Point {
    type Key = (u64, u64);
    fn atom_key(&self) -> (u64, u64) {
        self.key()
    }
}

/// A finitely supported signed measure with zero total weight.
///
/// Atoms are aggregated per point in order of first appearance; atoms
/// whose weights cancel exactly are dropped. Equality ignores atom order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "P: Deserialize<'de> + AtomPoint", serialize = "P: Serialize"))]
#[serde(try_from = "MoleculeRepr<P>")]
pub struct Molecule<P> {
    atoms: Vec<(P, f64)>,
}

#[derive(Deserialize)]
struct MoleculeRepr<P> {
    atoms: Vec<(P, f64)>,
}

impl<P: AtomPoint> TryFrom<MoleculeRepr<P>> for Molecule<P> {
    type Error = Error;
    fn try_from(r: MoleculeRepr<P>) -> Result<Self> {
        Molecule::new(r.atoms)
    }
}

impl<P: AtomPoint> PartialEq for Molecule<P> {
    fn eq(&self, other: &Self) -> bool {
        let sorted = |m: &Self| {
            let mut v: Vec<(P::Key, f64)> = m.atoms.iter().map(|(p, w)| (p.atom_key(), *w)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        sorted(self) == sorted(other)
    }
}

impl<P: AtomPoint> Default for Molecule<P> {
    fn default() -> Self {
        Molecule { atoms: Vec::new() }
    }
}

impl<P: AtomPoint> Molecule<P> {
    pub fn new(atoms: impl IntoIterator<Item = (P, f64)>) -> Result<Self> {
        let m = Self::aggregate(atoms);
        if m.atoms.iter().any(|(_, w)| !w.is_finite()) {
            return Err(Error::invalid("non-finite atom weight"));
        }
        let total = m.total();
        if total.abs() > BALANCE_TOL {
            return Err(Error::Unbalanced(total));
        }
        Ok(m)
    }

    /// Aggregates without checking the balance; boundaries are balanced by construction.
    pub(crate) fn aggregate(atoms: impl IntoIterator<Item = (P, f64)>) -> Self {
        let mut index: BTreeMap<P::Key, usize> = BTreeMap::new();
        let mut out: Vec<(P, f64)> = Vec::new();
        for (p, w) in atoms {
            match index.get(&p.atom_key()) {
                Some(&k) => out[k].1 += w,
                None => {
                    index.insert(p.atom_key(), out.len());
                    out.push((p, w));
                }
            }
        }
        out.retain(|(_, w)| *w != 0.0);
        Molecule { atoms: out }
    }

    /// The Dirac difference `δ_p − δ_q`.
    pub fn dipole(p: P, q: P) -> Self {
        Self::aggregate([(p, 1.0), (q, -1.0)])
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[(P, f64)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Σ |weights|, the mass of the molecule as a 0-current.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w.abs()).sum()
    }

    pub fn weight_at(&self, p: P) -> f64 {
        self.atoms
            .iter()
            .find(|(q, _)| q.atom_key() == p.atom_key())
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn positive(&self) -> Vec<(P, f64)> {
        self.atoms.iter().filter(|(_, w)| *w > 0.0).copied().collect()
    }

    /// Negative part with positive weights.
    pub fn negative(&self) -> Vec<(P, f64)> {
        self.atoms.iter().filter(|(_, w)| *w < 0.0).map(|&(p, w)| (p, -w)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::aggregate(self.atoms.iter().map(|&(p, w)| (p, s * w)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::aggregate(self.atoms.iter().chain(other.atoms.iter()).copied())
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    pub fn map_points<Q: AtomPoint>(&self, f: impl Fn(P) -> Q) -> Molecule<Q> {
        Molecule::aggregate(self.atoms.iter().map(|&(p, w)| (f(p), w)))
    }

    /// Largest absolute atom difference against `other`, matching atoms by point.
    pub fn max_atom_diff(&self, other: &Self) -> f64 {
        self.minus(other).atoms.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_and_drops_cancelled_atoms() {
        let m = Molecule::new([(0usize, 1.0), (1, -1.0), (0, 1.0), (2, -1.0)]).unwrap();
        assert_eq!(m.atoms(), &[(0, 2.0), (1, -1.0), (2, -1.0)]);
        let z = Molecule::new([(3usize, 1.0), (3, -1.0)]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(matches!(Molecule::new([(0usize, 1.0)]), Err(Error::Unbalanced(_))));
    }

    #[test]
    fn negative_zero_points_merge() {
        let m = Molecule::new([(Point::new(0.0, 1.0), 1.0), (Point::new(-0.0, 1.0), -1.0)]).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn json_roundtrip_validates() {
        let m = Molecule::new([(0usize, 0.5), (2, -0.5)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Molecule<usize>>(&s).unwrap(), m);
        assert!(serde_json::from_str::<Molecule<usize>>(r#"{"atoms":[[0,1.0]]}"#).is_err());
    }
}
