//! Flat norms of edge chains on cubical 2-complexes, by linear programming.

use serde::{Deserialize, Serialize};

use crate::currents::{PlaneChain, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};
use crate::solvers::{simplex_lp, LinearProgram};

/// Relative tolerance for grid membership of chain endpoints.
pub const GRID_TOL: f64 = 1e-9;

/// A uniform grid `[0, nx] × [0, ny]` of square cells of side `h`.
///
/// Horizontal edges come first, indexed `j·nx + i` for the edge from node
/// `(i, j)` to `(i+1, j)`; vertical edges follow, indexed `nh + j·(nx+1) + i`
/// for the edge from `(i, j)` to `(i, j+1)`. Faces are indexed `j·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicalComplex {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl CubicalComplex {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && origin.is_finite()) || nx == 0 || ny == 0 {
            return Err(Error::invalid("complex needs h > 0 and at least one cell"));
        }
        Ok(CubicalComplex { origin, h, nx, ny })
    }

    /// The smallest complex of cell size `h` containing every chain endpoint
    /// plus a margin of `pad` cells; the origin is snapped to the `h`-lattice.
    pub fn covering(chains: &[&PlaneChain], h: f64, pad: usize) -> Result<Self> {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in chains {
            if let Some((a, b)) = c.bbox() {
                lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
                hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
            }
        }
        if !lo.is_finite() {
            lo = Point::ORIGIN;
            hi = Point::ORIGIN;
        }
        let p = pad as f64;
        let i0 = (lo.x / h).round() - p;
        let j0 = (lo.y / h).round() - p;
        let nx = ((hi.x / h).round() + p - i0).max(1.0) as usize;
        let ny = ((hi.y / h).round() + p - j0).max(1.0) as usize;
        CubicalComplex::new(Point::new(i0 * h, j0 * h), h, nx, ny)
    }

    pub fn horizontal_edges(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn edge_count(&self) -> usize {
        self.horizontal_edges() + (self.nx + 1) * self.ny
    }

    pub fn face_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn h_edge(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn v_edge(&self, i: usize, j: usize) -> usize {
        self.horizontal_edges() + j * (self.nx + 1) + i
    }

    /// Endpoints of edge `e`, in its positive orientation.
    pub fn edge_endpoints(&self, e: usize) -> (Point, Point) {
        let nh = self.horizontal_edges();
        if e < nh {
            let (i, j) = (e % self.nx, e / self.nx);
            (self.node(i, j), self.node(i + 1, j))
        } else {
            let k = e - nh;
            let (i, j) = (k % (self.nx + 1), k / (self.nx + 1));
            (self.node(i, j), self.node(i, j + 1))
        }
    }

    /// `∂₂` of face `(i, j)`, counter-clockwise.
    pub fn face_boundary(&self, f: usize) -> [(usize, f64); 4] {
        let (i, j) = (f % self.nx, f / self.nx);
        [
            (self.h_edge(i, j), 1.0),
            (self.v_edge(i + 1, j), 1.0),
            (self.h_edge(i, j + 1), -1.0),
            (self.v_edge(i, j), -1.0),
        ]
    }

    /// `∂₁` of edge `e` as `(tail node, head node)` in flat node indices.
    pub fn edge_nodes(&self, e: usize) -> (usize, usize) {
        let nh = self.horizontal_edges();
        let idx = |i: usize, j: usize| j * (self.nx + 1) + i;
        if e < nh {
            let (i, j) = (e % self.nx, e / self.nx);
            (idx(i, j), idx(i + 1, j))
        } else {
            let k = e - nh;
            let (i, j) = (k % (self.nx + 1), k / (self.nx + 1));
            (idx(i, j), idx(i, j + 1))
        }
    }

    fn grid_coord(&self, v: f64, origin: f64, n: usize) -> Result<usize> {
        let s = (v - origin) / self.h;
        let r = s.round();
        if (s - r).abs() > GRID_TOL * (1.0 + s.abs()) || r < 0.0 || r > n as f64 {
            return Err(Error::OffGrid(format!("coordinate {v} is not a node of the complex")));
        }
        Ok(r as usize)
    }

    /// Edge coefficients of an axis-aligned chain whose pieces join grid nodes.
    pub fn snap(&self, c: &PlaneChain) -> Result<EdgeChain> {
        let mut coeffs = vec![0.0; self.edge_count()];
        for p in &c.pieces {
            let (i0, j0) = (self.grid_coord(p.start.x, self.origin.x, self.nx)?, self.grid_coord(p.start.y, self.origin.y, self.ny)?);
            let (i1, j1) = (self.grid_coord(p.end.x, self.origin.x, self.nx)?, self.grid_coord(p.end.y, self.origin.y, self.ny)?);
            if i0 != i1 && j0 != j1 {
                return Err(Error::OffGrid("piece is not axis-aligned".into()));
            }
            if j0 == j1 {
                let (lo, hi, s) = if i0 <= i1 { (i0, i1, 1.0) } else { (i1, i0, -1.0) };
                for i in lo..hi {
                    coeffs[self.h_edge(i, j0)] += s * p.weight;
                }
            } else {
                let (lo, hi, s) = if j0 <= j1 { (j0, j1, 1.0) } else { (j1, j0, -1.0) };
                for j in lo..hi {
                    coeffs[self.v_edge(i0, j)] += s * p.weight;
                }
            }
        }
        Ok(EdgeChain { coeffs })
    }

    /// Mass `Σ h |c_e|`.
    pub fn mass(&self, c: &EdgeChain) -> f64 {
        self.h * c.coeffs.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `∂₂ s` as an edge chain.
    pub fn boundary_of(&self, s: &[f64]) -> EdgeChain {
        let mut coeffs = vec![0.0; self.edge_count()];
        for (f, &w) in s.iter().enumerate() {
            if w != 0.0 {
                for (e, sgn) in self.face_boundary(f) {
                    coeffs[e] += sgn * w;
                }
            }
        }
        EdgeChain { coeffs }
    }

    /// Converts edge coefficients back into a chain of unit segments.
    pub fn to_chain(&self, c: &EdgeChain) -> PlaneChain {
        let mut out = PlaneChain::zero();
        for (e, &w) in c.coeffs.iter().enumerate() {
            if w != 0.0 {
                let (a, b) = self.edge_endpoints(e);
                out = out.plus(&PlaneChain::segment(a, b, w, NormKind::L2));
            }
        }
        out
    }
}

/// Real coefficients over the oriented edges of a complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeChain {
    pub coeffs: Vec<f64>,
}

impl EdgeChain {
    pub fn zero(edges: usize) -> Self {
        EdgeChain { coeffs: vec![0.0; edges] }
    }

    pub fn plus(&self, other: &EdgeChain) -> EdgeChain {
        EdgeChain {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn minus(&self, other: &EdgeChain) -> EdgeChain {
        EdgeChain {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }
}

/// Optimal decomposition `t = r + ∂₂ s` of the complex flat norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatResult {
    /// `Σ h |r_e| + Σ h² |s_f|`.
    pub value: f64,
    pub r: EdgeChain,
    pub s: Vec<f64>,
    pub pivots: usize,
}

impl FlatResult {
    /// `max_e |t_e − r_e − (∂₂ s)_e|`.
    pub fn decomposition_residual(&self, t: &EdgeChain, cx: &CubicalComplex) -> f64 {
        let ds = cx.boundary_of(&self.s);
        t.coeffs
            .iter()
            .zip(&self.r.coeffs)
            .zip(&ds.coeffs)
            .map(|((t, r), d)| (t - r - d).abs())
            .fold(0.0, f64::max)
    }
}

/// Complex flat norm `min Σ h|r| + h²|s|` subject to `r + ∂₂ s = t`.
///
/// Free variables are split into positive and negative parts; the residual
/// columns form a feasible starting basis, so only phase two runs.
pub fn flat_norm(t: &EdgeChain, cx: &CubicalComplex) -> Result<FlatResult> {
    let ne = cx.edge_count();
    let nf = cx.face_count();
    if t.coeffs.len() != ne {
        return Err(Error::DimensionMismatch(format!("chain has {} coefficients, complex {ne} edges", t.coeffs.len())));
    }
    if t.is_zero() {
        return Ok(FlatResult {
            value: 0.0,
            r: EdgeChain::zero(ne),
            s: vec![0.0; nf],
            pivots: 0,
        });
    }
    let (h, area) = (cx.h, cx.h * cx.h);
    let mut lp = LinearProgram::new(ne);
    lp.rhs = t.coeffs.clone();
    for e in 0..ne {
        lp.add_var(h, vec![(e, 1.0)]);
    }
    for e in 0..ne {
        lp.add_var(h, vec![(e, -1.0)]);
    }
    for f in 0..nf {
        lp.add_var(area, cx.face_boundary(f).to_vec());
    }
    for f in 0..nf {
        lp.add_var(area, cx.face_boundary(f).iter().map(|&(e, s)| (e, -s)).collect());
    }
    let sol = simplex_lp(&lp)?;
    let x = &sol.x;
    let r = EdgeChain {
        coeffs: (0..ne).map(|e| x[e] - x[ne + e]).collect(),
    };
    let s: Vec<f64> = (0..nf).map(|f| x[2 * ne + f] - x[2 * ne + nf + f]).collect();
    let value = h * r.coeffs.iter().map(|v| v.abs()).sum::<f64>() + area * s.iter().map(|v| v.abs()).sum::<f64>();
    Ok(FlatResult {
        value,
        r,
        s,
        pivots: sol.pivots,
    })
}

/// `(ℓ(γ⁰) + ℓ(γ¹) + 2)·d_∞(γ⁰, γ¹)` under constant-speed parametrizations.
pub fn flat_upper_bound_pair(g0: &Polyline, g1: &Polyline, norm: NormKind) -> f64 {
    let d = g0.param_path(norm).d_inf(&g1.param_path(norm), norm);
    if d == 0.0 {
        return 0.0;
    }
    (g0.length(norm) + g1.length(norm) + 2.0) * d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn loop_chain(pts: &[Point]) -> PlaneChain {
        let mut v = pts.to_vec();
        v.push(pts[0]);
        PlaneChain::from_polyline(&Polyline::new(v).unwrap(), 1.0, NormKind::L2)
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let cx = CubicalComplex::new(Point::ORIGIN, 0.5, 3, 2).unwrap();
        let mut div = vec![0i64; (cx.nx + 1) * (cx.ny + 1)];
        for f in 0..cx.face_count() {
            for (e, s) in cx.face_boundary(f) {
                let (a, b) = cx.edge_nodes(e);
                div[b] += s as i64;
                div[a] -= s as i64;
            }
        }
        assert!(div.iter().all(|d| *d == 0));
    }

    #[test]
    fn snap_examples() {
        let cx = CubicalComplex::new(Point::ORIGIN, 1.0, 3, 3).unwrap();
        let seg = cx.snap(&PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2)).unwrap();
        assert_eq!(seg.coeffs.iter().filter(|c| **c != 0.0).count(), 1);
        assert_eq!(seg.coeffs[cx.h_edge(0, 0)], 1.0);
        let sq = cx.snap(&loop_chain(&[p(1.0, 1.0), p(2.0, 1.0), p(2.0, 2.0), p(1.0, 2.0)])).unwrap();
        assert_eq!(sq.coeffs.iter().filter(|c| **c != 0.0).count(), 4);
        let back = PlaneChain::segment(p(1.0, 0.0), p(0.0, 0.0), 1.0, NormKind::L2);
        let zero = cx.snap(&PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2).plus(&back)).unwrap();
        assert!(zero.is_zero());
        let diag = PlaneChain::segment(p(0.0, 0.0), p(1.0, 1.0), 1.0, NormKind::L2);
        assert!(matches!(cx.snap(&diag), Err(Error::OffGrid(_))));
        let off = PlaneChain::segment(p(0.5, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
        assert!(matches!(cx.snap(&off), Err(Error::OffGrid(_))));
    }

    #[test]
    fn snap_preserves_mass() {
        let cx = CubicalComplex::new(p(-1.0, -1.0), 0.25, 12, 12).unwrap();
        let c = PlaneChain::from_polyline(
            &Polyline::new(vec![p(-0.5, 0.0), p(1.0, 0.0), p(1.0, 1.25), p(0.25, 1.25)]).unwrap(),
            -1.5,
            NormKind::L2,
        );
        assert!((cx.mass(&cx.snap(&c).unwrap()) - c.mass()).abs() < 1e-12);
    }

    #[test]
    fn zero_chain_has_zero_flat_norm() {
        let cx = CubicalComplex::new(Point::ORIGIN, 1.0, 2, 2).unwrap();
        assert_eq!(flat_norm(&EdgeChain::zero(cx.edge_count()), &cx).unwrap().value, 0.0);
    }

    #[test]
    fn unit_square_boundary() {
        let cx = CubicalComplex::new(Point::ORIGIN, 1.0, 3, 3).unwrap();
        let t = cx.snap(&loop_chain(&[p(1.0, 1.0), p(2.0, 1.0), p(2.0, 2.0), p(1.0, 2.0)])).unwrap();
        let res = flat_norm(&t, &cx).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12);
        assert!(res.decomposition_residual(&t, &cx) < 1e-12);
    }

    #[test]
    fn pair_bound_examples() {
        let a = Polyline::segment(p(0.0, 0.0), p(1.0, 0.0));
        assert_eq!(flat_upper_bound_pair(&a, &a, NormKind::L2), 0.0);
        let b = Polyline::segment(p(0.0, 0.05), p(1.0, 0.05));
        assert!((flat_upper_bound_pair(&a, &b, NormKind::L2) - 0.2).abs() < 1e-15);
    }
}
