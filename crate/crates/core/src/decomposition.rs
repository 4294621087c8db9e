//! Path and cycle decomposition of edge flows, and fragments of the
//! decomposed curves inside a closed set.

use serde::{Deserialize, Serialize};

use crate::currents::{restrict_chain, restrict_polyline, ClosedSet, Fragment, GraphChain, Molecule, Polyline, TestForm};
use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};
use crate::spaces::{Ambient, Edge, MetricGraph};
use crate::transport::{ae_norm, minimal_filling};

/// Signed weight per stored edge; positive means `u → v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeFlow {
    pub weights: Vec<f64>,
}

impl EdgeFlow {
    pub fn new(g: &MetricGraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != g.edges().len() {
            return Err(Error::DimensionMismatch("one weight per edge".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite edge weight"));
        }
        Ok(EdgeFlow { weights })
    }

    pub fn from_chain(c: &GraphChain, g: &MetricGraph) -> Result<Self> {
        Self::new(g, c.edge_flow(g)?)
    }

    pub fn to_chain(&self, g: &MetricGraph) -> Result<GraphChain> {
        let w: Vec<(usize, f64)> = self.weights.iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect();
        GraphChain::from_edge_weights(g, &w)
    }

    pub fn mass(&self, g: &MetricGraph) -> f64 {
        self.weights.iter().zip(g.edges()).map(|(w, e)| w.abs() * e.length).sum()
    }

    /// Net outflow minus inflow per vertex; `∂T = −div`.
    pub fn divergence(&self, g: &MetricGraph) -> Vec<f64> {
        let mut div = vec![0.0; g.vertex_count()];
        for (w, e) in self.weights.iter().zip(g.edges()) {
            div[e.u] += w;
            div[e.v] -= w;
        }
        div
    }
}

/// A weighted curve of the decomposition, as vertices and the edges between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCurve {
    pub weight: f64,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl WeightedCurve {
    pub fn length(&self, g: &MetricGraph) -> f64 {
        self.edges.iter().map(|&e| g.edges()[e].length).sum()
    }

    /// The curve as a chain of weight `weight`.
    pub fn chain(&self, g: &MetricGraph) -> GraphChain {
        let mut c = GraphChain::zero();
        for (k, &e) in self.edges.iter().enumerate() {
            c.push(crate::currents::Piece {
                start: self.vertices[k],
                end: self.vertices[k + 1],
                weight: self.weight,
                length: g.edges()[e].length,
                edge: Some(e),
            });
        }
        c
    }

    pub fn polyline(&self, g: &MetricGraph) -> Result<Polyline> {
        let coords = g.coords().ok_or_else(|| Error::invalid("graph has no coordinates"))?;
        Polyline::new(self.vertices.iter().map(|&v| coords[v]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub paths: Vec<WeightedCurve>,
    /// Closed curves; the first vertex is repeated at the end.
    pub cycles: Vec<WeightedCurve>,
    /// `M(T) − Σ w ℓ` over paths and cycles.
    pub mass_defect: f64,
    /// `Σ w ℓ` over cycles.
    pub cycle_mass: f64,
}

impl Decomposition {
    pub fn curves(&self) -> impl Iterator<Item = &WeightedCurve> {
        self.paths.iter().chain(&self.cycles)
    }

    /// Per-edge signed sum of the curves.
    pub fn reassemble(&self, g: &MetricGraph) -> Vec<f64> {
        let mut flow = vec![0.0; g.edges().len()];
        for c in self.curves() {
            for (k, &e) in c.edges.iter().enumerate() {
                flow[e] += if g.edges()[e].u == c.vertices[k] { c.weight } else { -c.weight };
            }
        }
        flow
    }

    /// `(Σ w δ_start, Σ w δ_end)` over the paths.
    pub fn marginals(&self) -> (Molecule<usize>, Molecule<usize>) {
        let starts = self.paths.iter().map(|p| (p.vertices[0], p.weight));
        let ends = self.paths.iter().map(|p| (*p.vertices.last().expect("non-empty"), p.weight));
        (Molecule::aggregate(starts), Molecule::aggregate(ends))
    }

    /// `Σ w ⟦γ⟧(f, π)` over all curves, through the vertex coordinates.
    pub fn evaluate(&self, g: &MetricGraph, form: &TestForm, norm: NormKind) -> Result<f64> {
        let mut total = 0.0;
        for c in self.curves() {
            total += c.chain(g).embed(g, norm)?.evaluate(form);
        }
        Ok(total)
    }
}

/// Arc `e` traversed from `from` to `to`.
#[derive(Clone, Copy)]
struct Step {
    edge: usize,
    from: usize,
    to: usize,
}

struct Residual<'a> {
    g: &'a MetricGraph,
    r: Vec<f64>,
    tol: f64,
}

impl Residual<'_> {
    /// Lowest-index edge leaving `v` along the direction of its residual flow.
    fn out_arc(&self, v: usize) -> Option<Step> {
        let mut best: Option<Step> = None;
        for &(nb, e) in self.g.neighbors(v) {
            let edge = self.g.edges()[e];
            let along = (edge.u == v && self.r[e] > self.tol) || (edge.v == v && self.r[e] < -self.tol);
            if along && best.is_none_or(|b| e < b.edge) {
                best = Some(Step { edge: e, from: v, to: nb });
            }
        }
        best
    }

    fn amount(&self, s: Step) -> f64 {
        self.r[s.edge].abs()
    }

    fn peel(&mut self, steps: &[Step], w: f64) {
        for s in steps {
            let sign = if self.g.edges()[s.edge].u == s.from { 1.0 } else { -1.0 };
            self.r[s.edge] -= sign * w;
            if self.r[s.edge].abs() <= self.tol {
                self.r[s.edge] = 0.0;
            }
        }
    }
}

fn curve(weight: f64, steps: &[Step]) -> WeightedCurve {
    let mut vertices = vec![steps[0].from];
    vertices.extend(steps.iter().map(|s| s.to));
    WeightedCurve {
        weight,
        vertices,
        edges: steps.iter().map(|s| s.edge).collect(),
    }
}

/// Standard flow decomposition: source-to-sink paths first, then cycles.
///
/// Walks always take the lowest-index admissible edge. A walk that closes
/// on itself sheds the closed part as a cycle before continuing.
pub fn decompose_flow(g: &MetricGraph, f: &EdgeFlow) -> Result<Decomposition> {
    if f.weights.len() != g.edges().len() {
        return Err(Error::DimensionMismatch("one weight per edge".into()));
    }
    let scale = f.weights.iter().fold(0.0f64, |m, w| m.max(w.abs())).max(1.0);
    let tol = 1e-13 * scale;
    let mut res = Residual { g, r: f.weights.clone(), tol };
    let mut div = f.divergence(g);
    let mut paths = Vec::new();
    let mut cycles = Vec::new();
    let max_walks = 4 * (g.edges().len() + g.vertex_count()) + 16;
    let mut walks = 0;

    while let Some(s) = (0..div.len()).find(|&v| div[v] > tol) {
        walks += 1;
        if walks > max_walks {
            return Err(Error::Infeasible("flow decomposition did not terminate".into()));
        }
        let mut steps: Vec<Step> = Vec::new();
        let mut pos = vec![usize::MAX; g.vertex_count()];
        pos[s] = 0;
        let mut v = s;
        loop {
            if v != s && div[v] < -tol {
                break;
            }
            let Some(step) = res.out_arc(v) else { break };
            steps.push(step);
            v = step.to;
            if pos[v] != usize::MAX {
                let cyc: Vec<Step> = steps.split_off(pos[v]);
                let w = cyc.iter().map(|&x| res.amount(x)).fold(f64::INFINITY, f64::min);
                res.peel(&cyc, w);
                cycles.push(curve(w, &cyc));
                for x in &cyc {
                    pos[x.to] = usize::MAX;
                }
                pos[v] = steps.len();
                continue;
            }
            pos[v] = steps.len();
        }
        if steps.is_empty() {
            // numerically stranded divergence
            div[s] = 0.0;
            continue;
        }
        let t = steps.last().expect("non-empty").to;
        let w = steps.iter().map(|&x| res.amount(x)).fold(div[s].min(-div[t]).max(0.0), f64::min);
        res.peel(&steps, w);
        div[s] -= w;
        div[t] += w;
        paths.push(curve(w, &steps));
    }

    while let Some(e) = (0..res.r.len()).find(|&e| res.r[e] != 0.0) {
        walks += 1;
        if walks > max_walks {
            return Err(Error::Infeasible("cycle peeling did not terminate".into()));
        }
        let edge = g.edges()[e];
        let first = if res.r[e] > 0.0 { Step { edge: e, from: edge.u, to: edge.v } } else { Step { edge: e, from: edge.v, to: edge.u } };
        let mut steps = vec![first];
        let mut pos = vec![usize::MAX; g.vertex_count()];
        pos[first.from] = 0;
        pos[first.to] = 1;
        let mut v = first.to;
        loop {
            let Some(step) = res.out_arc(v) else {
                // leftover below tolerance
                res.r[e] = 0.0;
                steps.clear();
                break;
            };
            steps.push(step);
            v = step.to;
            if pos[v] != usize::MAX {
                steps.drain(..pos[v]);
                break;
            }
            pos[v] = steps.len();
        }
        if steps.is_empty() {
            continue;
        }
        let w = steps.iter().map(|&x| res.amount(x)).fold(f64::INFINITY, f64::min);
        res.peel(&steps, w);
        cycles.push(curve(w, &steps));
    }

    let covered: f64 = paths.iter().chain(&cycles).map(|c| c.weight * c.length(g)).sum();
    let cycle_mass = cycles.iter().map(|c| c.weight * c.length(g)).sum();
    Ok(Decomposition {
        paths,
        cycles,
        mass_defect: f.mass(g) - covered,
        cycle_mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentRow {
    pub weight: f64,
    pub length: f64,
    pub fragments: usize,
    pub fragment_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentRepresentation {
    /// One entry per decomposed curve with non-empty preimage.
    pub fragments: Vec<Fragment>,
    pub rows: Vec<FragmentRow>,
    /// `M(N⌊E)` computed on the flow's own pieces.
    pub restricted_mass: f64,
    /// `Σ w M(γ|_{γ⁻¹(E)})`.
    pub fragment_mass: f64,
    pub mass_identity_residual: f64,
}

/// Restricts every decomposed curve to `E` through the vertex coordinates.
pub fn fragment_representation(d: &Decomposition, g: &MetricGraph, flow: &EdgeFlow, set: &ClosedSet, norm: NormKind) -> Result<FragmentRepresentation> {
    let mut fragments = Vec::new();
    let mut rows = Vec::new();
    let mut fragment_mass = 0.0;
    for c in d.curves() {
        let poly = c.polyline(g)?;
        let frag = restrict_polyline(&poly, c.weight, set, norm)?;
        let (count, mass) = match &frag {
            Some(fr) => (fr.domain.len(), fr.mass(norm)),
            None => (0, 0.0),
        };
        fragment_mass += mass;
        rows.push(FragmentRow {
            weight: c.weight,
            length: poly.length(norm),
            fragments: count,
            fragment_mass: mass,
        });
        fragments.extend(frag);
    }
    let whole = flow.to_chain(g)?.embed(g, norm)?;
    let restricted_mass = restrict_chain(&whole, set, norm)?.mass();
    Ok(FragmentRepresentation {
        fragments,
        rows,
        restricted_mass,
        fragment_mass,
        mass_identity_residual: (restricted_mass - fragment_mass).abs(),
    })
}

/// A discretized Rickman rug with two columns `x = 0` and `x = s`.
///
/// Horizontal gaps are subdivided until their intrinsic length reaches 1,
/// standing in for the infinite length of horizontal curves under `d_α`.
pub fn rickman_rug(alpha: f64, s: f64, rows: usize) -> Result<MetricGraph> {
    if !(alpha > 0.0 && alpha < 1.0) || !(s > 0.0) || rows == 0 {
        return Err(Error::invalid("need 0 < α < 1, s > 0 and at least one row"));
    }
    let sub = (s.powf(-alpha / (1.0 - alpha))).ceil().max(1.0) as usize;
    let cols = sub + 1;
    let id = |i: usize, j: usize| j * cols + i;
    let mut coords = Vec::with_capacity(cols * (rows + 1));
    for j in 0..=rows {
        for i in 0..cols {
            coords.push(Point::new(s * i as f64 / sub as f64, j as f64 / rows as f64));
        }
    }
    let amb = Ambient::DAlpha(alpha);
    let mut edges = Vec::new();
    for j in 0..=rows {
        for i in 0..cols {
            if i + 1 < cols {
                let (a, b) = (id(i, j), id(i + 1, j));
                edges.push(Edge { u: a, v: b, length: amb.point_dist(coords[a], coords[b]) });
            }
            if j < rows {
                let (a, b) = (id(i, j), id(i, j + 1));
                edges.push(Edge { u: a, v: b, length: amb.point_dist(coords[a], coords[b]) });
            }
        }
    }
    MetricGraph::new(coords.len(), Some(coords), edges, amb)
}

/// One cell of the Rickman regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RickmanRow {
    pub s: f64,
    /// `‖∂T_s‖_AE` under the intrinsic distance, the lower bound for `F(T_s)`.
    pub ae_intrinsic: f64,
    /// `‖∂T_s‖_AE` under `d_α`.
    pub ae_ambient: f64,
    pub filling_mass: f64,
    pub mass: f64,
}

/// `T_s = ⟦{0}×[0,1]⟧ − ⟦{s}×[0,1]⟧` on the discretized rug.
pub fn rickman_row(alpha: f64, s: f64, rows: usize) -> Result<RickmanRow> {
    let g = rickman_rug(alpha, s, rows)?;
    let cols = g.vertex_count() / (rows + 1);
    let (b0, t0) = (0, rows * cols);
    let (b1, t1) = (cols - 1, rows * cols + cols - 1);
    let up0: Vec<usize> = (0..=rows).map(|j| j * cols).collect();
    let up1: Vec<usize> = (0..=rows).map(|j| j * cols + cols - 1).collect();
    let t = GraphChain::from_vertex_path(&g, &up0, 1.0)?.minus(&GraphChain::from_vertex_path(&g, &up1, 1.0)?);
    let m = Molecule::new([(t0, 1.0), (b0, -1.0), (b1, 1.0), (t1, -1.0)])?;
    debug_assert_eq!(t.boundary(), m);
    let ae_intrinsic = ae_norm(&m, g.path_metric())?.value;
    let ae_ambient = ae_norm(&m, &g.ambient_matrix())?.value;
    let filling_mass = minimal_filling(&m, &g)?.mass;
    Ok(RickmanRow {
        s,
        ae_intrinsic,
        ae_ambient,
        filling_mass,
        mass: t.mass(),
    })
}
