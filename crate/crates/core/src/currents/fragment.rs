use serde::{Deserialize, Serialize};

use super::chain::PlaneChain;
use super::closed_set::{merge_intervals, ClosedSet};
use super::forms::TestForm;
use super::polyline::{ParamPath, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};

/// A polyline restricted to a compact domain `K ⊂ [0, 1]`, with weight `w ≥ 0`.
///
/// The polyline carries its constant-speed parametrization; `domain` lists
/// disjoint closed intervals of that parameter in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub path: Polyline,
    pub domain: Vec<(f64, f64)>,
    pub weight: f64,
}

impl Fragment {
    pub fn new(path: Polyline, domain: Vec<(f64, f64)>, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::invalid("fragment weight must be finite and ≥ 0"));
        }
        for w in domain.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::MalformedPartition("fragment intervals must be disjoint and sorted".into()));
            }
        }
        if domain.iter().any(|&(a, b)| !(0.0 <= a && a <= b && b <= 1.0)) {
            return Err(Error::MalformedPartition("fragment intervals must lie in [0, 1]".into()));
        }
        Ok(Fragment { path, domain, weight })
    }

    /// Lebesgue measure of the domain.
    pub fn domain_measure(&self) -> f64 {
        self.domain.iter().map(|(a, b)| b - a).sum()
    }

    /// Straight pieces of the curve over the domain, as `(start, end)` points.
    pub fn segments(&self, norm: NormKind) -> Vec<(Point, Point)> {
        let pp = self.path.param_path(norm);
        let mut out = Vec::new();
        for &(lo, hi) in &self.domain {
            for (t0, t1, p0, p1) in pp.pieces() {
                let (a, b) = (lo.max(t0), hi.min(t1));
                if a < b {
                    let s = |t: f64| match t {
                        _ if t == t0 => p0,
                        _ if t == t1 => p1,
                        _ => p0.lerp(p1, (t - t0) / (t1 - t0)),
                    };
                    out.push((s(a), s(b)));
                }
            }
        }
        out
    }

    /// `w ∫_K |γ̇_t| dt`.
    pub fn mass(&self, norm: NormKind) -> f64 {
        self.weight * self.segments(norm).iter().map(|&(a, b)| norm.dist(a, b)).sum::<f64>()
    }

    /// `w ∫_K f(γ_t) (π∘γ)'_t dt`.
    pub fn evaluate(&self, form: &TestForm, norm: NormKind) -> f64 {
        self.weight * self.segments(norm).iter().map(|&(a, b)| form.integrate_segment(a, b)).sum::<f64>()
    }
}

/// A finite weighted family of curve fragments in a normed plane.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FragmentChain {
    pub norm: NormKind,
    pub fragments: Vec<Fragment>,
}

impl FragmentChain {
    pub fn new(norm: NormKind) -> Self {
        FragmentChain {
            norm,
            fragments: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.fragments.iter().map(|f| f.mass(self.norm)).sum()
    }

    pub fn evaluate(&self, form: &TestForm) -> f64 {
        self.fragments.iter().map(|f| f.evaluate(form, self.norm)).sum()
    }

    /// All nondegenerate oriented segments with their weights.
    pub fn weighted_segments(&self) -> Vec<(Point, Point, f64)> {
        self.fragments
            .iter()
            .flat_map(|f| f.segments(self.norm).into_iter().map(move |(a, b)| (a, b, f.weight)))
            .collect()
    }

    /// Reassembles the nondegenerate parts into a chain of segments.
    pub fn to_chain(&self) -> PlaneChain {
        let mut out = PlaneChain::zero();
        for (a, b, w) in self.weighted_segments() {
            out = out.plus(&PlaneChain::segment(a, b, w, self.norm));
        }
        out
    }
}

/// Closure of `γ⁻¹(E)` for a constant-speed polyline, as disjoint closed intervals.
pub fn preimage_intervals(path: &ParamPath, set: &ClosedSet) -> Vec<(f64, f64)> {
    let mut parts = Vec::new();
    for (t0, t1, p0, p1) in path.pieces() {
        for (s0, s1) in set.segment_intervals(p0, p1) {
            parts.push((t0 + s0 * (t1 - t0), t0 + s1 * (t1 - t0)));
        }
    }
    merge_intervals(parts)
}

/// `Φ(w⟦γ⟧) = w γ|_{closure of γ⁻¹(E)}`; `None` when the preimage is empty.
pub fn restrict_polyline(path: &Polyline, weight: f64, set: &ClosedSet, norm: NormKind) -> Result<Option<Fragment>> {
    let (path, weight) = if weight < 0.0 { (path.reversed(), -weight) } else { (path.clone(), weight) };
    let domain = preimage_intervals(&path.param_path(norm), set);
    if domain.is_empty() {
        return Ok(None);
    }
    Fragment::new(path, domain, weight).map(Some)
}

/// Restricts every piece of a chain to `E`; negative pieces are reversed so
/// that fragment weights stay nonnegative.
pub fn restrict_chain(c: &PlaneChain, set: &ClosedSet, norm: NormKind) -> Result<FragmentChain> {
    let mut out = FragmentChain::new(norm);
    for p in &c.pieces {
        if p.weight == 0.0 {
            continue;
        }
        if let Some(f) = restrict_polyline(&Polyline::segment(p.start, p.end), p.weight, set, norm)? {
            out.fragments.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::closed_set::Primitive;
    use crate::currents::forms::ScalarFn;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn unit() -> PlaneChain {
        PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2)
    }

    fn boxes(xs: &[(f64, f64)]) -> ClosedSet {
        ClosedSet::new(
            xs.iter()
                .map(|&(a, b)| Primitive::Box { min: p(a, -1.0), max: p(b, 1.0) })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn restrict_to_superset_keeps_everything() {
        let f = restrict_chain(&unit(), &boxes(&[(-1.0, 2.0)]), NormKind::L2).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.fragments[0].domain, vec![(0.0, 1.0)]);
        assert_eq!(f.mass(), 1.0);
    }

    #[test]
    fn restrict_to_disjoint_set_is_empty() {
        let f = restrict_chain(&unit(), &boxes(&[(2.0, 3.0)]), NormKind::L2).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn fat_cantor_stage_two() {
        let e = boxes(&[(0.0, 0.1875), (0.25, 0.375), (0.625, 0.75), (0.8125, 1.0)]);
        let f = restrict_chain(&unit(), &e, NormKind::L2).unwrap();
        assert_eq!(f.fragments[0].domain.len(), 4);
        assert!((f.mass() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn fragment_evaluation_is_domain_measure() {
        let e = boxes(&[(0.0, 0.375), (0.625, 1.0)]);
        let f = restrict_chain(&unit(), &e, NormKind::L2).unwrap();
        let form = TestForm::new(ScalarFn::Constant(1.0), ScalarFn::affine(1.0, 0.0, 0.0));
        assert!((f.evaluate(&form) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn negative_weight_reverses_path() {
        let c = unit().scaled(-2.0);
        let f = restrict_chain(&c, &boxes(&[(0.0, 0.25)]), NormKind::L2).unwrap();
        assert_eq!(f.fragments[0].weight, 2.0);
        assert_eq!(f.fragments[0].domain, vec![(0.75, 1.0)]);
        assert_eq!(f.mass(), 0.5);
    }
}
