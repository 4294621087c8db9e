//! Arens–Eells norms, minimal fillings and the isomorphism check.

use serde::{Deserialize, Serialize};

use crate::currents::{AtomPoint, GraphChain, Molecule, Piece};
use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};
use crate::solvers::{min_cost_flow, FlowNetwork};
use crate::spaces::{qc_constants, Ambient, DistMatrix, MetricGraph};

/// Tolerance for comparing two independently computed optima.
pub const SOLVER_AGREEMENT_TOL: f64 = 1e-7;

/// Optimal coupling of `m⁺` and `m⁻` with a Kantorovich potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "P: Deserialize<'de>", serialize = "P: Serialize"))]
pub struct AeResult<P> {
    pub value: f64,
    /// `(p, q, mass)` moved from a positive atom `p` to a negative atom `q`.
    pub coupling: Vec<(P, P, f64)>,
    /// 1-Lipschitz potential `u` with `Σ u·m = value`.
    pub potential: Vec<f64>,
}

impl<P: AtomPoint> AeResult<P> {
    pub fn coupling_cost(&self, d: impl Fn(P, P) -> f64) -> f64 {
        self.coupling.iter().map(|&(p, q, w)| w * d(p, q)).sum()
    }
}

/// Transport between the atoms of `m` under the distance `d`.
/// Returns the value, the coupling and the potential on the negative atoms.
fn transport_atoms<P: AtomPoint>(m: &Molecule<P>, d: &impl Fn(P, P) -> f64) -> Result<(f64, Vec<(P, P, f64)>, Vec<(P, f64)>)> {
    let pos = m.positive();
    let neg = m.negative();
    if pos.is_empty() {
        return Ok((0.0, Vec::new(), Vec::new()));
    }
    let np = pos.len();
    let mut net = FlowNetwork::new(np + neg.len());
    for (i, &(p, w)) in pos.iter().enumerate() {
        net.supply[i] = w;
        for (j, &(q, _)) in neg.iter().enumerate() {
            let c = d(p, q);
            if c.is_finite() {
                net.add_arc(i, np + j, c, f64::INFINITY);
            }
        }
    }
    for (j, &(_, w)) in neg.iter().enumerate() {
        net.supply[np + j] = -w;
    }
    let sol = min_cost_flow(&net)?;
    let coupling = net
        .arcs
        .iter()
        .zip(&sol.flow)
        .filter(|(_, f)| **f > 0.0)
        .map(|(a, f)| (pos[a.u].0, neg[a.v - np].0, *f))
        .collect();
    // u = −π on the sinks; the sources are recovered by the c-transform
    let sinks = neg.iter().enumerate().map(|(j, &(q, _))| (q, -sol.potential[np + j])).collect();
    Ok((sol.cost, coupling, sinks))
}

/// `u(x) = min_q (u(q) + d(x, q))` over the anchored points.
fn mcshane<P: Copy>(x: P, anchors: &[(P, f64)], d: &impl Fn(P, P) -> f64) -> f64 {
    anchors.iter().map(|&(q, u)| u + d(x, q)).fold(f64::INFINITY, f64::min)
}

/// `‖m‖_AE = W₁(m⁺, m⁻)` on a finite metric given by a distance matrix.
///
/// The potential is defined on every point of the space.
pub fn ae_norm(m: &Molecule<usize>, metric: &DistMatrix) -> Result<AeResult<usize>> {
    let n = metric.len();
    if let Some(&(p, _)) = m.atoms().iter().find(|(p, _)| *p >= n) {
        return Err(Error::OffSpace(p));
    }
    let d = |a: usize, b: usize| metric.get(a, b);
    let (value, coupling, sinks) = transport_atoms(m, &d)?;
    let potential = if sinks.is_empty() {
        vec![0.0; n]
    } else {
        (0..n).map(|x| mcshane(x, &sinks, &d)).collect()
    };
    Ok(AeResult { value, coupling, potential })
}

/// `‖m‖_AE` for a molecule of points in a normed plane.
///
/// The potential is listed per atom, in the molecule's atom order.
pub fn ae_norm_plane(m: &Molecule<Point>, norm: NormKind) -> Result<AeResult<Point>> {
    let d = |a: Point, b: Point| norm.dist(a, b);
    let (value, coupling, sinks) = transport_atoms(m, &d)?;
    let potential = if sinks.is_empty() {
        vec![0.0; m.atoms().len()]
    } else {
        m.atoms().iter().map(|&(x, _)| mcshane(x, &sinks, &d)).collect()
    };
    Ok(AeResult { value, coupling, potential })
}

/// Checks the three certificate properties of an [`AeResult`] on a matrix metric.
pub fn check_ae_certificate(m: &Molecule<usize>, metric: &DistMatrix, r: &AeResult<usize>, tol: f64) -> bool {
    let coupling_ok = (r.coupling_cost(|p, q| metric.get(p, q)) - r.value).abs() <= tol;
    let n = metric.len();
    let mut lip_ok = true;
    for i in 0..n {
        for j in 0..n {
            let dij = metric.get(i, j);
            if dij.is_finite() && (r.potential[i] - r.potential[j]).abs() > dij + tol {
                lip_ok = false;
            }
        }
    }
    let pairing: f64 = m.atoms().iter().map(|&(p, w)| w * r.potential[p]).sum();
    coupling_ok && lip_ok && pairing >= r.value - 1e2 * tol
}

/// A minimal-mass chain with prescribed boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingResult {
    pub chain: GraphChain,
    pub mass: f64,
}

/// Beckmann problem: the least-mass edge chain with boundary `m`.
pub fn minimal_filling(m: &Molecule<usize>, g: &MetricGraph) -> Result<FillingResult> {
    let n = g.vertex_count();
    if let Some(&(p, _)) = m.atoms().iter().find(|(p, _)| *p >= n) {
        return Err(Error::OffSpace(p));
    }
    let mut net = FlowNetwork::new(n);
    for e in g.edges() {
        net.add_edge(e.u, e.v, e.length);
    }
    // ∂T = m: flow leaves the negative atoms and enters the positive ones
    for &(p, w) in m.atoms() {
        net.supply[p] = -w;
    }
    let sol = min_cost_flow(&net)?;
    let mut pieces = Vec::new();
    for (k, e) in g.edges().iter().enumerate() {
        let f = sol.flow[2 * k] - sol.flow[2 * k + 1];
        if f != 0.0 {
            pieces.push(Piece {
                start: e.u,
                end: e.v,
                weight: f,
                length: e.length,
                edge: Some(k),
            });
        }
    }
    let chain = GraphChain { pieces };
    let mass = chain.mass();
    Ok(FillingResult { chain, mass })
}

/// Outcome of comparing the quotient norm of `[T]` with `‖∂T‖_AE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoReport {
    /// `‖∂T‖_AE` under the ambient distance `d`.
    pub ae_ambient: f64,
    /// `‖∂T‖_AE` under the intrinsic distance `d_ℓ`.
    pub ae_intrinsic: f64,
    /// `‖[T]‖`, the minimal filling mass.
    pub filling_mass: f64,
    pub mass: f64,
    pub qc: f64,
    /// `filling / ae_ambient`, `None` when `∂T = 0`.
    pub ratio: Option<f64>,
    /// `qc⁻¹·ae(d) ≤ filling`.
    pub lower_ok: bool,
    /// `filling ≤ qc·ae(d)`.
    pub upper_ok: bool,
    /// `ae(d) ≤ filling`, the norm-one bound for `∂`.
    pub sharp_lower_ok: bool,
    /// `filling = ae(d_ℓ)`, two independent solvers.
    pub identity_ok: bool,
    /// `filling = ae(d)`, checked only on geodesic graphs.
    pub geodesic_ok: Option<bool>,
}

impl IsoReport {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok && self.sharp_lower_ok && self.identity_ok && self.geodesic_ok.unwrap_or(true)
    }
}

/// Verifies the isomorphism sandwich for a chain on a connected graph.
pub fn isomorphism_check(t: &GraphChain, g: &MetricGraph) -> Result<IsoReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    t.check_on(g)?;
    let m = t.boundary();
    let ambient = g.ambient_matrix();
    let ae_ambient = ae_norm(&m, &ambient)?.value;
    let ae_intrinsic = ae_norm(&m, g.path_metric())?.value;
    let filling_mass = minimal_filling(&m, g)?.mass;
    let qc = qc_constants(g).space;
    let tol = SOLVER_AGREEMENT_TOL;
    Ok(IsoReport {
        ae_ambient,
        ae_intrinsic,
        filling_mass,
        mass: t.mass(),
        qc,
        ratio: (ae_ambient > 0.0).then(|| filling_mass / ae_ambient),
        lower_ok: ae_ambient / qc <= filling_mass + tol,
        upper_ok: filling_mass <= qc * ae_ambient + tol,
        sharp_lower_ok: ae_ambient <= filling_mass + tol,
        identity_ok: (filling_mass - ae_intrinsic).abs() <= tol,
        geodesic_ok: (g.ambient() == Ambient::Path).then(|| (filling_mass - ae_ambient).abs() <= tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Edge;

    fn line_metric(xs: &[f64]) -> DistMatrix {
        DistMatrix::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs())
    }

    #[test]
    fn dipole_norm_is_distance() {
        let d = line_metric(&[0.0, 2.5]);
        let m = Molecule::dipole(1usize, 0);
        let r = ae_norm(&m, &d).unwrap();
        assert_eq!(r.value, 2.5);
        assert!(check_ae_certificate(&m, &d, &r, 1e-9));
    }

    #[test]
    fn three_points_on_a_line() {
        let d = line_metric(&[0.0, 1.0, 3.0]);
        let m = Molecule::new([(0usize, 1.0), (1, -2.0), (2, 1.0)]).unwrap();
        let r = ae_norm(&m, &d).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
        assert!(check_ae_certificate(&m, &d, &r, 1e-9));
    }

    #[test]
    fn zero_molecule() {
        let r = ae_norm(&Molecule::zero(), &line_metric(&[0.0, 1.0])).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.coupling.is_empty());
    }

    #[test]
    fn off_space_atom() {
        let m = Molecule::dipole(0usize, 5);
        assert!(matches!(ae_norm(&m, &line_metric(&[0.0, 1.0])), Err(Error::OffSpace(5))));
    }

    #[test]
    fn filling_of_single_edge() {
        let g = MetricGraph::new(2, None, vec![Edge { u: 0, v: 1, length: 1.0 }], Ambient::Path).unwrap();
        let f = minimal_filling(&Molecule::dipole(1, 0), &g).unwrap();
        assert_eq!(f.mass, 1.0);
        assert_eq!(f.chain.boundary(), Molecule::dipole(1, 0));
    }

    #[test]
    fn filling_on_four_cycle() {
        let edges = (0..4).map(|i| Edge { u: i, v: (i + 1) % 4, length: 1.0 }).collect();
        let g = MetricGraph::new(4, None, edges, Ambient::Path).unwrap();
        let m = Molecule::dipole(2, 0);
        let f = minimal_filling(&m, &g).unwrap();
        assert_eq!(f.mass, 2.0);
        assert_eq!(f.chain.boundary(), m);
    }

    #[test]
    fn filling_across_components_is_infeasible() {
        let g = MetricGraph::new(2, None, vec![], Ambient::Path).unwrap();
        assert!(matches!(minimal_filling(&Molecule::dipole(1, 0), &g), Err(Error::Infeasible(_))));
    }

    fn v_detour() -> MetricGraph {
        let h = (0.75f64).sqrt();
        let coords = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h)];
        MetricGraph::embedded(coords, &[(0, 2), (2, 1)], Ambient::Euclidean).unwrap()
    }

    #[test]
    fn v_detour_filling_doubles_ae() {
        let g = v_detour();
        let m = Molecule::dipole(1, 0);
        assert!((ae_norm(&m, &g.ambient_matrix()).unwrap().value - 1.0).abs() < 1e-12);
        assert!((minimal_filling(&m, &g).unwrap().mass - 2.0).abs() < 1e-12);
        let t = GraphChain::from_vertex_path(&g, &[0, 2, 1], 1.0).unwrap();
        let rep = isomorphism_check(&t, &g).unwrap();
        assert!(rep.passed());
        assert!((rep.qc - 2.0).abs() < 1e-12);
        assert!((rep.ratio.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn geodesic_graph_has_equality() {
        let edges = vec![
            Edge { u: 0, v: 1, length: 1.0 },
            Edge { u: 1, v: 2, length: 2.0 },
            Edge { u: 0, v: 2, length: 2.5 },
        ];
        let g = MetricGraph::new(3, None, edges, Ambient::Path).unwrap();
        let t = GraphChain::from_edge_weights(&g, &[(0, 1.0), (1, -0.5)]).unwrap();
        let rep = isomorphism_check(&t, &g).unwrap();
        assert_eq!(rep.geodesic_ok, Some(true));
        assert!(rep.passed());
    }
}
