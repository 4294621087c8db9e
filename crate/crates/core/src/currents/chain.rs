use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::forms::TestForm;
use super::molecule::{AtomPoint, Molecule};
use super::polyline::Polyline;
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, NormKind, Point, DIST_TOL};
use crate::spaces::MetricGraph;

/// One oriented geodesic piece `a ⟦start → end⟧` of a 1-chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece<P> {
    pub start: P,
    pub end: P,
    pub weight: f64,
    pub length: f64,
    /// Edge reference for chains on graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
}

/// A finite weighted sum of oriented geodesic pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "P: Deserialize<'de>", serialize = "P: Serialize"))]
pub struct Chain1<P> {
    pub pieces: Vec<Piece<P>>,
}

/// A chain of straight segments in a normed plane.
pub type PlaneChain = Chain1<Point>;
/// A chain of oriented edges of a metric graph.
pub type GraphChain = Chain1<usize>;

impl<P> Default for Chain1<P> {
    fn default() -> Self {
        Chain1 { pieces: Vec::new() }
    }
}

impl<P: AtomPoint> Chain1<P> {
    pub fn new(pieces: Vec<Piece<P>>) -> Result<Self> {
        for p in &pieces {
            if !p.weight.is_finite() || !p.length.is_finite() || p.length < 0.0 {
                return Err(Error::invalid("piece weight and length must be finite, length ≥ 0"));
            }
        }
        Ok(Chain1 { pieces })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    /// `M(T) = Σ |a_i| ℓ_i`.
    pub fn mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.weight.abs() * p.length).sum()
    }

    /// `∂T = Σ a_i (δ_end − δ_start)`.
    pub fn boundary(&self) -> Molecule<P> {
        Molecule::aggregate(self.pieces.iter().flat_map(|p| [(p.end, p.weight), (p.start, -p.weight)]))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Chain1 {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    weight: s * p.weight,
                    ..*p
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Chain1 { pieces }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    pub fn push(&mut self, piece: Piece<P>) {
        self.pieces.push(piece);
    }

    /// Merges pieces over the same unordered endpoint pair (and edge),
    /// orienting each group by its first piece, and drops zero weights.
    pub fn canonical(&self) -> Self {
        let mut index: BTreeMap<(P::Key, P::Key, Option<usize>), usize> = BTreeMap::new();
        let mut out: Vec<Piece<P>> = Vec::new();
        for p in &self.pieces {
            let (ks, ke) = (p.start.atom_key(), p.end.atom_key());
            let key = if ks <= ke { (ks, ke, p.edge) } else { (ke, ks, p.edge) };
            match index.get(&key) {
                Some(&k) => {
                    let same = out[k].start.atom_key() == ks;
                    out[k].weight += if same { p.weight } else { -p.weight };
                }
                None => {
                    index.insert(key, out.len());
                    out.push(*p);
                }
            }
        }
        out.retain(|p| p.weight != 0.0 && p.length > 0.0);
        Chain1 { pieces: out }
    }
}

impl Chain1<Point> {
    /// `w ⟦a → b⟧` with length measured in `norm`.
    pub fn segment(a: Point, b: Point, weight: f64, norm: NormKind) -> Self {
        Chain1 {
            pieces: vec![Piece {
                start: a,
                end: b,
                weight,
                length: norm.dist(a, b),
                edge: None,
            }],
        }
    }

    /// `w ⟦γ⟧` for a polyline γ, one piece per nondegenerate segment.
    pub fn from_polyline(poly: &Polyline, weight: f64, norm: NormKind) -> Self {
        let pieces = poly
            .points
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| Piece {
                start: w[0],
                end: w[1],
                weight,
                length: norm.dist(w[0], w[1]),
                edge: None,
            })
            .collect();
        Chain1 { pieces }
    }

    /// Checks `ℓ_i ≥ ‖end − start‖ − tol` for every piece.
    pub fn check_lengths(&self, norm: NormKind) -> Result<()> {
        for p in &self.pieces {
            if p.length < norm.dist(p.start, p.end) - DIST_TOL {
                return Err(Error::invalid("piece shorter than the distance of its endpoints"));
            }
        }
        Ok(())
    }

    /// `φ_# T` for an affine `φ`; segment lengths are remeasured in `norm`.
    pub fn pushforward(&self, map: &AffineMap, norm: NormKind) -> Result<Self> {
        if !map.is_finite() {
            return Err(Error::UnsupportedMap("non-finite affine map".into()));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let (a, b) = (map.apply(p.start), map.apply(p.end));
                Piece {
                    start: a,
                    end: b,
                    weight: p.weight,
                    length: norm.dist(a, b),
                    edge: p.edge,
                }
            })
            .collect();
        Ok(Chain1 { pieces })
    }

    pub fn translated(&self, w: Point) -> Self {
        Chain1 {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    start: p.start + w,
                    end: p.end + w,
                    ..*p
                })
                .collect(),
        }
    }

    /// `T(f, π) = Σ a_i ∫ f dπ` along each segment.
    pub fn evaluate(&self, form: &TestForm) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.weight != 0.0)
            .map(|p| p.weight * form.integrate_segment(p.start, p.end))
            .sum()
    }

    /// Bounding box `(min, max)` of all piece endpoints.
    pub fn bbox(&self) -> Option<(Point, Point)> {
        let mut it = self.pieces.iter().flat_map(|p| [p.start, p.end]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), q| {
            (Point::new(lo.x.min(q.x), lo.y.min(q.y)), Point::new(hi.x.max(q.x), hi.y.max(q.y)))
        }))
    }
}

impl Chain1<usize> {
    /// Chain of graph edges `Σ w_e ⟦u_e → v_e⟧`, oriented as stored in the graph.
    pub fn from_edge_weights(g: &MetricGraph, weights: &[(usize, f64)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(weights.len());
        for &(e, w) in weights {
            let edge = g.edges().get(e).ok_or(Error::OffSpace(e))?;
            if !w.is_finite() {
                return Err(Error::invalid("non-finite edge weight"));
            }
            pieces.push(Piece {
                start: edge.u,
                end: edge.v,
                weight: w,
                length: edge.length,
                edge: Some(e),
            });
        }
        Ok(Chain1 { pieces })
    }

    /// `w ⟦v₀ → v₁ → … ⟧` along consecutive graph edges, each the shortest edge
    /// between its endpoints.
    pub fn from_vertex_path(g: &MetricGraph, path: &[usize], weight: f64) -> Result<Self> {
        let mut pieces = Vec::new();
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if u >= g.vertex_count() || v >= g.vertex_count() {
                return Err(Error::OffSpace(u.max(v)));
            }
            let e = g
                .neighbors(u)
                .iter()
                .filter(|(nb, _)| *nb == v)
                .map(|&(_, e)| e)
                .min_by(|&a, &b| g.edges()[a].length.total_cmp(&g.edges()[b].length).then(a.cmp(&b)))
                .ok_or_else(|| Error::invalid(format!("no edge between {u} and {v}")))?;
            pieces.push(Piece {
                start: u,
                end: v,
                weight,
                length: g.edges()[e].length,
                edge: Some(e),
            });
        }
        Ok(Chain1 { pieces })
    }

    /// Validates vertices and edge references against `g`.
    pub fn check_on(&self, g: &MetricGraph) -> Result<()> {
        for p in &self.pieces {
            for v in [p.start, p.end] {
                if v >= g.vertex_count() {
                    return Err(Error::OffSpace(v));
                }
            }
            if let Some(e) = p.edge {
                let edge = g.edges().get(e).ok_or(Error::OffSpace(e))?;
                let ok = (edge.u == p.start && edge.v == p.end) || (edge.u == p.end && edge.v == p.start);
                if !ok {
                    return Err(Error::invalid(format!("piece does not match edge {e}")));
                }
            }
            if p.length < g.ambient_dist(p.start, p.end) - DIST_TOL {
                return Err(Error::invalid("piece shorter than the ambient distance of its endpoints"));
            }
        }
        Ok(())
    }

    /// Signed flow per edge (positive along the stored edge orientation).
    pub fn edge_flow(&self, g: &MetricGraph) -> Result<Vec<f64>> {
        let mut flow = vec![0.0; g.edges().len()];
        for p in &self.pieces {
            let e = p.edge.ok_or_else(|| Error::invalid("piece without edge reference"))?;
            let edge = g.edges().get(e).ok_or(Error::OffSpace(e))?;
            flow[e] += if edge.u == p.start { p.weight } else { -p.weight };
        }
        Ok(flow)
    }

    /// Realizes the chain in the plane through the graph's vertex coordinates.
    pub fn embed(&self, g: &MetricGraph, norm: NormKind) -> Result<PlaneChain> {
        let coords = g.coords().ok_or_else(|| Error::invalid("graph has no coordinates"))?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let (a, b) = (coords[p.start], coords[p.end]);
                Piece {
                    start: a,
                    end: b,
                    weight: p.weight,
                    length: norm.dist(a, b),
                    edge: p.edge,
                }
            })
            .collect();
        Ok(Chain1 { pieces })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::forms::ScalarFn;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn boundary_of_segment() {
        let c = PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
        assert_eq!(c.boundary().atoms(), &[(p(1.0, 0.0), 1.0), (p(0.0, 0.0), -1.0)]);
    }

    #[test]
    fn triangle_loop_has_no_boundary() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        let t = PlaneChain::from_polyline(&Polyline::new(vec![a, b, c, a]).unwrap(), 1.0, NormKind::L2);
        assert!(t.boundary().is_zero());
    }

    #[test]
    fn boundary_of_two_step_chain() {
        let (x, y, z) = (p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0));
        let t = PlaneChain::segment(x, y, 2.0, NormKind::L2).plus(&PlaneChain::segment(y, z, 2.0, NormKind::L2));
        let b = t.boundary();
        assert_eq!(b.weight_at(z), 2.0);
        assert_eq!(b.weight_at(x), -2.0);
        assert_eq!(b.weight_at(y), 0.0);
        assert_eq!(b.atoms().len(), 2);
    }

    #[test]
    fn mass_examples() {
        assert_eq!(PlaneChain::zero().mass(), 0.0);
        assert_eq!(PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), -3.0, NormKind::L2).mass(), 3.0);
    }

    #[test]
    fn pushforward_examples() {
        let c = PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
        assert_eq!(c.pushforward(&AffineMap::IDENTITY, NormKind::L2).unwrap(), c);
        assert_eq!(c.pushforward(&AffineMap::scaling(0.5), NormKind::L2).unwrap().mass(), 0.5);
        let w = p(0.3, -2.0);
        let moved = c.pushforward(&AffineMap::translation(w), NormKind::L2).unwrap();
        assert_eq!(moved.mass(), 1.0);
        assert_eq!(moved.boundary(), c.boundary().map_points(|q| q + w));
    }

    #[test]
    fn evaluate_examples() {
        let c = PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
        let form = TestForm::new(ScalarFn::Constant(1.0), ScalarFn::affine(1.0, 0.0, 0.0));
        assert_eq!(c.evaluate(&form), 1.0);
        let zero = TestForm::new(ScalarFn::Constant(0.0), ScalarFn::affine(1.0, 0.0, 0.0));
        assert_eq!(c.evaluate(&zero), 0.0);
    }

    #[test]
    fn canonical_cancels_opposite_pieces() {
        let a = PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
        let b = PlaneChain::segment(p(1.0, 0.0), p(0.0, 0.0), 1.0, NormKind::L2);
        assert!(a.plus(&b).canonical().is_empty());
    }
}
