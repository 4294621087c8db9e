//! Straight-line homotopies: the filling `⟦γ⁰⟧ − ⟦γ¹⟧ = ∂S + R`, the affine
//! homotopy current `H(T)`, chord interpolation, and graph geodesic bicombings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::currents::polyline::merged_knots;
use crate::currents::{GraphChain, Molecule, ParamPath, PlaneChain, Polyline, ScalarFn, TestForm};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, NormKind, Point};
use crate::quadrature;
use crate::spaces::MetricGraph;

/// Default tolerance of the tensor quadrature.
pub const QUAD_TOL: f64 = 1e-8;
/// Default cap on `n × n` quadrature panels per cell.
pub const MAX_PANELS: usize = 1 << 14;

/// Samples strictly inside `[lo, hi]` so one-sided derivatives stay on their piece.
fn inside(s: f64, lo: f64, hi: f64) -> f64 {
    let d = 1e-9 * (hi - lo);
    s.clamp(lo + d, hi - d)
}

/// The filling of Lemma-style homotopy `H(s, t) = (1 − t) γ⁰(s) + t γ¹(s)`.
///
/// `S` is kept as an evaluator; `R` is the chain of the two endpoint segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyFill {
    pub norm: NormKind,
    pub gamma0: ParamPath,
    pub gamma1: ParamPath,
    pub len0: f64,
    pub len1: f64,
    pub d_inf: f64,
    /// `(ℓ⁰ + ℓ¹)·d_∞`.
    pub cert_s: f64,
    /// `d(γ⁰₀, γ¹₀) + d(γ⁰₁, γ¹₁)`.
    pub cert_r: f64,
    /// Quadrature estimate of `M(S)` with the Busemann area of the norm.
    pub measured_s: f64,
    pub measured_r: f64,
    pub r_chain: PlaneChain,
    /// Merged knots of both curves; `H` is smooth between them.
    breaks: Vec<f64>,
    quad_tol: f64,
}

impl HomotopyFill {
    fn point(&self, s: f64, t: f64) -> Point {
        self.gamma0.eval(s).lerp(self.gamma1.eval(s), t)
    }

    /// `(∂_s H, ∂_t H)` at `(s, t)`.
    fn jacobian(&self, s: f64, t: f64) -> (Point, Point) {
        let ds = (1.0 - t) * self.gamma0.velocity(s) + t * self.gamma1.velocity(s);
        let dt = self.gamma1.eval(s) - self.gamma0.eval(s);
        (ds, dt)
    }

    fn integrate_cells(&self, g: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        self.breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                quadrature::integrate_2d(|s, t| g(inside(s, lo, hi), t), (lo, hi), (0.0, 1.0), self.quad_tol, MAX_PANELS)
            })
            .sum()
    }

    /// `S(f, π₁, π₂) = ∫∫ f∘H · det(∇(π₁∘H), ∇(π₂∘H)) ds dt`.
    pub fn s_eval(&self, f: &ScalarFn, pi1: &ScalarFn, pi2: &ScalarFn) -> f64 {
        self.integrate_cells(|s, t| {
            let x = self.point(s, t);
            let (hs, ht) = self.jacobian(s, t);
            let (g1, g2) = (pi1.grad(x), pi2.grad(x));
            f.value(x) * (g1.dot(hs) * g2.dot(ht) - g1.dot(ht) * g2.dot(hs))
        })
    }

    /// `∂S(f, π) = S(1, f, π)`.
    pub fn boundary_s(&self, form: &TestForm) -> f64 {
        self.s_eval(&ScalarFn::Constant(1.0), &form.f, &form.pi)
    }

    /// `⟦γ⁰⟧(f,π) − ⟦γ¹⟧(f,π) − ∂S(f,π) − R(f,π)`.
    pub fn boundary_residual(&self, form: &TestForm) -> f64 {
        let c0 = PlaneChain::from_polyline(&Polyline { points: self.gamma0.points.clone() }, 1.0, self.norm);
        let c1 = PlaneChain::from_polyline(&Polyline { points: self.gamma1.points.clone() }, 1.0, self.norm);
        c0.evaluate(form) - c1.evaluate(form) - self.boundary_s(form) - self.r_chain.evaluate(form)
    }

    /// Largest residual over `forms`, each scaled by `1 + LIP(π)‖f‖_∞`.
    pub fn max_scaled_residual(&self, forms: &[TestForm]) -> f64 {
        let lo = self.r_chain.bbox();
        forms
            .par_iter()
            .map(|form| {
                let scale = 1.0 + form.pi.lip(self.norm) * sup_on_hull(&form.f, self, lo);
                self.boundary_residual(form).abs() / scale
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Upper bound for `|f|` on the image of the homotopy.
fn sup_on_hull(f: &ScalarFn, fill: &HomotopyFill, _hint: Option<(Point, Point)>) -> f64 {
    match f {
        ScalarFn::Constant(c) => c.abs(),
        ScalarFn::Sine { .. } | ScalarFn::Bump { .. } => 1.0,
        _ => {
            // affine and distance functions peak at vertices of the convex hull
            fill.gamma0
                .points
                .iter()
                .chain(&fill.gamma1.points)
                .map(|&p| f.value(p).abs())
                .fold(0.0, f64::max)
                .max(match f {
                    ScalarFn::Clipped { lo, hi, .. } => lo.abs().min(hi.abs()),
                    _ => 0.0,
                })
        }
    }
}

/// Builds the straight-line homotopy filling between two plane curves.
pub fn homotopy_fill(g0: &Polyline, g1: &Polyline, norm: NormKind) -> Result<HomotopyFill> {
    homotopy_fill_with(g0, g1, norm, QUAD_TOL)
}

pub fn homotopy_fill_with(g0: &Polyline, g1: &Polyline, norm: NormKind, quad_tol: f64) -> Result<HomotopyFill> {
    if g0.points.iter().chain(&g1.points).any(|p| !p.is_finite()) {
        return Err(Error::DimensionMismatch("curves must lie in the same plane".into()));
    }
    let p0 = g0.param_path(norm);
    let p1 = g1.param_path(norm);
    let (len0, len1) = (g0.length(norm), g1.length(norm));
    let d_inf = p0.d_inf(&p1, norm);
    let mut r_chain = PlaneChain::zero();
    if p0.start() != p1.start() {
        r_chain = r_chain.plus(&PlaneChain::segment(p0.start(), p1.start(), 1.0, norm));
    }
    if p0.end() != p1.end() {
        r_chain = r_chain.plus(&PlaneChain::segment(p0.end(), p1.end(), -1.0, norm));
    }
    let cert_r = norm.dist(p0.start(), p1.start()) + norm.dist(p0.end(), p1.end());
    let breaks = merged_knots(&p0.knots, &p1.knots);
    let mut fill = HomotopyFill {
        norm,
        gamma0: p0,
        gamma1: p1,
        len0,
        len1,
        d_inf,
        cert_s: (len0 + len1) * d_inf,
        cert_r,
        measured_s: 0.0,
        measured_r: r_chain.mass(),
        r_chain,
        breaks,
        quad_tol,
    };
    if d_inf > 0.0 {
        let factor = norm.area_factor();
        fill.measured_s = factor
            * fill.integrate_cells(|s, t| {
                let (hs, ht) = fill.jacobian(s, t);
                hs.cross(ht).abs()
            });
    }
    Ok(fill)
}

/// The `k = 1` affine homotopy current `H(T)` between `ψ_#T` and `φ_#T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineHomotopy {
    pub chain: PlaneChain,
    pub phi: AffineMap,
    pub psi: AffineMap,
    pub norm: NormKind,
    /// `2 Σ |a_i| ∫ ‖φ − ψ‖ max(Lip φ, Lip ψ) dℓ`.
    pub cert_mass: f64,
}

impl AffineHomotopy {
    fn h(&self, t: f64, x: Point) -> Point {
        self.psi.apply(x).lerp(self.phi.apply(x), t)
    }

    /// `H(T)(f, π₁, π₂) = Σ a ∫∫ f∘h (∂_t π₁∘h ∂_σ π₂∘h − ∂_t π₂∘h ∂_σ π₁∘h)`.
    pub fn eval(&self, f: &ScalarFn, pi1: &ScalarFn, pi2: &ScalarFn) -> f64 {
        self.chain
            .pieces
            .iter()
            .filter(|p| p.weight != 0.0)
            .map(|p| {
                let (a, b) = (p.start, p.end);
                let g = |sigma: f64, t: f64| {
                    let x = a.lerp(b, sigma);
                    let y = self.h(t, x);
                    let dt = self.phi.apply(x) - self.psi.apply(x);
                    let dx = b - a;
                    let dsig = (1.0 - t) * self.psi.apply_linear(dx) + t * self.phi.apply_linear(dx);
                    let (g1, g2) = (pi1.grad(y), pi2.grad(y));
                    f.value(y) * (g1.dot(dt) * g2.dot(dsig) - g2.dot(dt) * g1.dot(dsig))
                };
                p.weight * quadrature::integrate_2d(g, (0.0, 1.0), (0.0, 1.0), QUAD_TOL, MAX_PANELS)
            })
            .sum()
    }

    /// `∂H(T)(f, π) = H(T)(1, f, π)`.
    pub fn boundary_eval(&self, form: &TestForm) -> f64 {
        self.eval(&ScalarFn::Constant(1.0), &form.f, &form.pi)
    }

    /// `H(∂T)` as the chain `Σ m_x ⟦ψ(x) → φ(x)⟧`.
    pub fn of_boundary(&self) -> PlaneChain {
        let m: Molecule<Point> = self.chain.boundary();
        let mut out = PlaneChain::zero();
        for &(x, w) in m.atoms() {
            let (a, b) = (self.psi.apply(x), self.phi.apply(x));
            if a != b {
                out = out.plus(&PlaneChain::segment(a, b, w, self.norm));
            }
        }
        out
    }

    /// `φ_#T(f,π) − ψ_#T(f,π) − ∂H(T)(f,π) − H(∂T)(f,π)`.
    pub fn boundary_residual(&self, form: &TestForm) -> Result<f64> {
        let fphi = self.chain.pushforward(&self.phi, self.norm)?.evaluate(form);
        let fpsi = self.chain.pushforward(&self.psi, self.norm)?.evaluate(form);
        Ok(fphi - fpsi - self.boundary_eval(form) - self.of_boundary().evaluate(form))
    }

    pub fn max_residual(&self, forms: &[TestForm]) -> Result<f64> {
        let r: Result<Vec<f64>> = forms.par_iter().map(|f| self.boundary_residual(f)).collect();
        Ok(r?.into_iter().map(f64::abs).fold(0.0, f64::max))
    }
}

/// `∫₀¹ ‖v₀ + σ v₁‖ dσ`, split where a coordinate or a polyhedral face changes.
fn integrate_affine_norm(v0: Point, v1: Point, norm: NormKind) -> f64 {
    let mut breaks = Vec::new();
    let mut root = |c0: f64, c1: f64| {
        if c1 != 0.0 {
            breaks.push(-c0 / c1);
        }
    };
    root(v0.x, v1.x);
    root(v0.y, v1.y);
    let (wx, wy) = match norm {
        NormKind::WeightedMax { wx, wy } => (wx, wy),
        _ => (1.0, 1.0),
    };
    root(wx * v0.x - wy * v0.y, wx * v1.x - wy * v1.y);
    root(wx * v0.x + wy * v0.y, wx * v1.x + wy * v1.y);
    quadrature::integrate_split(|s| norm.norm(v0 + s * v1), 0.0, 1.0, &breaks, 1e-13)
}

/// Builds `H(T)` for affine `φ, ψ` with its mass certificate.
pub fn affine_homotopy_current(t: &PlaneChain, phi: &AffineMap, psi: &AffineMap, norm: NormKind) -> Result<AffineHomotopy> {
    if !phi.is_finite() || !psi.is_finite() {
        return Err(Error::UnsupportedMap("maps must be finite affine maps".into()));
    }
    let lip = phi.op_norm(norm).max(psi.op_norm(norm));
    let mut cert = 0.0;
    if phi != psi {
        for p in &t.pieces {
            // ‖φ(x) − ψ(x)‖ along the piece is the norm of an affine function
            let d0 = phi.apply(p.start) - psi.apply(p.start);
            let d1 = (phi.apply(p.end) - psi.apply(p.end)) - d0;
            cert += p.weight.abs() * p.length * integrate_affine_norm(d0, d1, norm);
        }
        cert *= 2.0 * lip;
    }
    Ok(AffineHomotopy {
        chain: t.clone(),
        phi: *phi,
        psi: *psi,
        norm,
        cert_mass: cert,
    })
}

/// Chords of `γ` between consecutive partition points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpolation {
    pub chain: PlaneChain,
    /// The interpolant, parametrized so that it meets `γ` at the partition.
    pub path: ParamPath,
    pub d_inf: f64,
}

impl Interpolation {
    pub fn polyline(&self) -> Polyline {
        Polyline {
            points: self.path.points.clone(),
        }
    }
}

/// Replaces `γ` by the chords `[γ(t_{j−1}), γ(t_j)]`.
pub fn interpolate_geodesic(gamma: &Polyline, partition: &[f64], norm: NormKind) -> Result<Interpolation> {
    if partition.len() < 2 || partition[0] != 0.0 || *partition.last().expect("len ≥ 2") != 1.0 {
        return Err(Error::MalformedPartition("partition must start at 0 and end at 1".into()));
    }
    if partition.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::MalformedPartition("partition must be strictly increasing".into()));
    }
    let pp = gamma.param_path(norm);
    let points: Vec<Point> = partition.iter().map(|&t| pp.eval(t)).collect();
    let path = ParamPath::new(partition.to_vec(), points.clone())?;
    let d_inf = pp.d_inf(&path, norm);
    let chain = PlaneChain::from_polyline(&Polyline { points }, 1.0, norm);
    Ok(Interpolation { chain, path, d_inf })
}

/// The uniform partition with `m` cells.
pub fn uniform_partition(m: usize) -> Vec<f64> {
    let m = m.max(1);
    (0..=m).map(|k| k as f64 / m as f64).collect()
}

/// A point on a metric graph: `offset` along edge `edge`, measured from its `u` end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: usize,
    pub offset: f64,
}

/// Shortest-path bicombing on a metric graph (ties by lowest-index predecessor).
pub struct GraphBicombing<'a> {
    pub graph: &'a MetricGraph,
}

impl<'a> GraphBicombing<'a> {
    pub fn new(graph: &'a MetricGraph) -> Result<Self> {
        if graph.edges().is_empty() {
            return Err(Error::invalid("bicombing needs at least one edge"));
        }
        Ok(GraphBicombing { graph })
    }

    fn vertex_point(&self, v: usize) -> GraphPoint {
        match self.graph.neighbors(v).first() {
            Some(&(_, e)) => {
                let edge = self.graph.edges()[e];
                GraphPoint {
                    edge: e,
                    offset: if edge.u == v { 0.0 } else { edge.length },
                }
            }
            None => GraphPoint { edge: usize::MAX, offset: 0.0 },
        }
    }

    /// `σ(x, y, t)`: the point at fraction `t` of the chosen geodesic.
    pub fn sigma(&self, x: usize, y: usize, t: f64) -> GraphPoint {
        let tree = self.graph.shortest_path_tree(x);
        let total = tree.dist[y];
        let Some(path) = tree.path_to(y).filter(|p| p.len() > 1 && total.is_finite()) else {
            return self.vertex_point(x);
        };
        let target = t.clamp(0.0, 1.0) * total;
        let mut acc = 0.0;
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            let e = tree.pred[v].expect("on the tree").1;
            let edge = self.graph.edges()[e];
            if acc + edge.length >= target {
                let along = target - acc;
                let offset = if edge.u == u { along } else { edge.length - along };
                return GraphPoint { edge: e, offset };
            }
            acc += edge.length;
        }
        self.vertex_point(y)
    }

    /// Intrinsic distance between two points on edges.
    pub fn dist(&self, p: GraphPoint, q: GraphPoint) -> f64 {
        let d = self.graph.path_metric();
        let ends = |g: GraphPoint| {
            let e = self.graph.edges()[g.edge];
            [(e.u, g.offset), (e.v, e.length - g.offset)]
        };
        let mut best = f64::INFINITY;
        if p.edge == q.edge {
            best = (p.offset - q.offset).abs();
        }
        for (a, da) in ends(p) {
            for (b, db) in ends(q) {
                best = best.min(da + d.get(a, b) + db);
            }
        }
        best
    }

    /// `d(σ_{x,y}(t), σ_{x',y'}(t)) − (1 − t) d(x,x') − t d(y,y')`.
    pub fn conical_defect(&self, x: usize, y: usize, x2: usize, y2: usize, t: f64) -> f64 {
        let d = self.graph.path_metric();
        let lhs = self.dist(self.sigma(x, y, t), self.sigma(x2, y2, t));
        lhs - (1.0 - t) * d.get(x, x2) - t * d.get(y, y2)
    }
}

/// Endpoint connectors of the graph homotopy between two vertex paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFill {
    pub r_chain: GraphChain,
    pub cert_r: f64,
}

/// `R = ⟦σ(γ⁰₀, γ¹₀)⟧ − ⟦σ(γ⁰₁, γ¹₁)⟧`; no quantitative `S` on graphs.
pub fn graph_homotopy_fill(g: &MetricGraph, gamma0: &[usize], gamma1: &[usize]) -> Result<GraphFill> {
    let (Some(&a0), Some(&b0), Some(&a1), Some(&b1)) = (gamma0.first(), gamma0.last(), gamma1.first(), gamma1.last()) else {
        return Err(Error::invalid("empty vertex path"));
    };
    let connector = |x: usize, y: usize, w: f64| -> Result<GraphChain> {
        let tree = g.shortest_path_tree(x);
        let path = tree.path_to(y).ok_or(Error::Disconnected)?;
        GraphChain::from_vertex_path(g, &path, w)
    };
    let r_chain = connector(a0, a1, 1.0)?.plus(&connector(b0, b1, -1.0)?);
    let d = g.path_metric();
    Ok(GraphFill {
        r_chain,
        cert_r: d.get(a0, a1) + d.get(b0, b1),
    })
}
