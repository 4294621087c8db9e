//! Ambient geometries: finite metric spaces, embedded metric graphs and
//! normed planes, together with intrinsic (length) distances and
//! quasiconvexity constants.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point, DIST_TOL};

/// Dense symmetric matrix of distances. Disconnection is `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn_with_diag(n, 0.0, |i, j| f(i, j))
    }

    /// Like [`DistMatrix::from_fn`] with a custom diagonal value.
    pub fn from_fn_with_diag(n: usize, diag: f64, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(if i == j { diag } else { f(i, j) });
            }
        }
        DistMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("distance matrix is not square".into()));
        }
        Ok(DistMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Sub-matrix on the given indices, in that order.
    pub fn restrict(&self, idx: &[usize]) -> DistMatrix {
        DistMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn scaled(&self, s: f64) -> DistMatrix {
        DistMatrix {
            n: self.n,
            data: self.data.iter().map(|d| d * s).collect(),
        }
    }

    /// Checks the metric axioms; `allow_infinite` admits the disconnection sentinel.
    pub fn check_metric(&self, allow_infinite: bool) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::invalid(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if d.is_nan() || d < 0.0 || (!allow_infinite && d.is_infinite()) {
                    return Err(Error::invalid(format!("bad distance at ({i},{j})")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::invalid(format!("points {i} and {j} coincide")));
                }
                if (d - self.get(j, i)).abs() > DIST_TOL && d.is_finite() {
                    return Err(Error::invalid(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = self.get(i, k);
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    if self.get(i, j) > dik + self.get(k, j) + DIST_TOL {
                        return Err(Error::invalid(format!("triangle inequality fails at ({i},{k},{j})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A finite metric space given by labels and a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    pub labels: Vec<String>,
    dist: DistMatrix,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: DistMatrix) -> Result<Self> {
        if labels.len() != dist.len() {
            return Err(Error::DimensionMismatch("labels vs distance matrix".into()));
        }
        dist.check_metric(false)?;
        Ok(FiniteMetricSpace { labels, dist })
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// How a metric graph measures the ambient distance `d` between vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    /// `d` is the graph path metric itself.
    Path,
    /// Euclidean distance of the embedded coordinates.
    Euclidean,
    /// `max(|Δx|^α, |Δy|)` on the embedded coordinates.
    DAlpha(f64),
}

impl Ambient {
    pub fn point_dist(self, a: Point, b: Point) -> f64 {
        match self {
            Ambient::Path | Ambient::Euclidean => (a - b).euclid(),
            Ambient::DAlpha(alpha) => (a.x - b.x).abs().powf(alpha).max((a.y - b.y).abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

/// A finite graph with positive edge lengths, optionally embedded in the plane.
#[derive(Debug)]
pub struct MetricGraph {
    n: usize,
    coords: Option<Vec<Point>>,
    edges: Vec<Edge>,
    ambient: Ambient,
    // (neighbor, edge index), sorted by neighbor for deterministic relaxation
    adjacency: Vec<Vec<(usize, usize)>>,
    path: OnceLock<DistMatrix>,
}

impl Clone for MetricGraph {
    fn clone(&self) -> Self {
        MetricGraph {
            n: self.n,
            coords: self.coords.clone(),
            edges: self.edges.clone(),
            ambient: self.ambient,
            adjacency: self.adjacency.clone(),
            path: self.path.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapKey(f64, usize);

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (distance, index)
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest-path tree from a single source.
#[derive(Debug, Clone)]
pub struct PathTree {
    pub dist: Vec<f64>,
    /// `(predecessor vertex, edge index)`; `None` at the source and unreachable vertices.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl PathTree {
    /// Vertex sequence from the source to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut out = vec![target];
        let mut cur = target;
        while let Some((p, _)) = self.pred[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Some(out)
    }
}

impl MetricGraph {
    pub fn new(n: usize, coords: Option<Vec<Point>>, edges: Vec<Edge>, ambient: Ambient) -> Result<Self> {
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::DimensionMismatch("coordinates vs vertex count".into()));
            }
            if c.iter().any(|p| !p.is_finite()) {
                return Err(Error::invalid("non-finite coordinate"));
            }
        } else if ambient != Ambient::Path {
            return Err(Error::invalid("embedded ambient distance needs coordinates"));
        }
        if let Ambient::DAlpha(a) = ambient {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid("d_alpha exponent must lie in (0, 1]"));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::OffSpace(e.u.max(e.v)));
            }
            if e.u == e.v {
                return Err(Error::invalid(format!("edge {k} is a loop")));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::invalid(format!("edge {k} has non-positive length")));
            }
            if let (Some(c), false) = (&coords, ambient == Ambient::Path) {
                let d = ambient.point_dist(c[e.u], c[e.v]);
                if e.length < d - DIST_TOL {
                    return Err(Error::invalid(format!(
                        "edge {k} is shorter ({}) than the ambient distance of its endpoints ({d})",
                        e.length
                    )));
                }
            }
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok(MetricGraph {
            n,
            coords,
            edges,
            ambient,
            adjacency,
            path: OnceLock::new(),
        })
    }

    /// Embedded graph whose edges are straight segments measured by `ambient`.
    pub fn embedded(coords: Vec<Point>, pairs: &[(usize, usize)], ambient: Ambient) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (coords.get(u), coords.get(v));
                match (a, b) {
                    (Some(a), Some(b)) => Ok(Edge {
                        u,
                        v,
                        length: ambient.point_dist(*a, *b),
                    }),
                    _ => Err(Error::OffSpace(u.max(v))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        MetricGraph::new(coords.len(), Some(coords), edges, ambient)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Copy of the graph with every edge length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<MetricGraph> {
        if self.ambient != Ambient::Path {
            return Err(Error::invalid("only path-ambient graphs scale without re-embedding"));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { length: e.length * s, ..*e })
            .collect();
        MetricGraph::new(self.n, self.coords.clone(), edges, self.ambient)
    }

    /// Dijkstra with a binary heap; ties go to the lowest-index predecessor.
    pub fn shortest_path_tree(&self, source: usize) -> PathTree {
        let mut dist = vec![f64::INFINITY; self.n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; self.n];
        let mut done = vec![false; self.n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapKey(0.0, source));
        while let Some(HeapKey(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, k) in &self.adjacency[u] {
                if done[v] {
                    continue;
                }
                let nd = d + self.edges[k].length;
                let better = nd < dist[v];
                let tie = nd == dist[v] && pred[v].is_some_and(|(p, _)| u < p);
                if better || tie {
                    dist[v] = nd;
                    pred[v] = Some((u, k));
                    if better {
                        heap.push(HeapKey(nd, v));
                    }
                }
            }
        }
        PathTree { dist, pred }
    }

    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.shortest_path_tree(source).dist
    }

    /// All-pairs intrinsic distance `d_ℓ`, memoized on first use.
    pub fn path_metric(&self) -> &DistMatrix {
        self.path.get_or_init(|| {
            let rows: Vec<Vec<f64>> = (0..self.n).into_par_iter().map(|s| self.distances_from(s)).collect();
            let mut m = DistMatrix::from_fn(self.n, |i, j| rows[i][j]);
            // symmetrize round-off between the two Dijkstra runs
            for i in 0..self.n {
                for j in (i + 1)..self.n {
                    let v = m.get(i, j).min(m.get(j, i));
                    m.data[i * self.n + j] = v;
                    m.data[j * self.n + i] = v;
                }
            }
            m
        })
    }

    /// Ambient distance `d` between two vertices.
    pub fn ambient_dist(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        match (self.ambient, &self.coords) {
            (Ambient::Path, _) => self.path_metric().get(u, v),
            (a, Some(c)) => a.point_dist(c[u], c[v]),
            (_, None) => unreachable!("checked at construction"),
        }
    }

    pub fn ambient_matrix(&self) -> DistMatrix {
        match self.ambient {
            Ambient::Path => self.path_metric().clone(),
            _ => DistMatrix::from_fn(self.n, |i, j| self.ambient_dist(i, j)),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(|d| d.is_finite())
    }

    /// Component label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Per-pair and global quasiconvexity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct QcReport {
    /// `d_ℓ(x,y) / d(x,y)`; 1 on the diagonal, ∞ across components.
    pub pair: DistMatrix,
    pub space: f64,
}

pub fn qc_constants(g: &MetricGraph) -> QcReport {
    let dl = g.path_metric();
    let n = g.vertex_count();
    let geodesic = g.ambient() == Ambient::Path;
    let pair = DistMatrix::from_fn_with_diag(n, 1.0, |i, j| {
        let l = dl.get(i, j);
        if !l.is_finite() {
            return f64::INFINITY;
        }
        if geodesic {
            return 1.0;
        }
        let d = g.ambient_dist(i, j);
        if d <= 0.0 {
            f64::INFINITY
        } else {
            l / d
        }
    });
    let space = pair.data.iter().copied().fold(1.0, f64::max);
    QcReport { pair, space }
}

/// The plane with one of the supported norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormedPlane {
    pub norm: NormKind,
}

impl NormedPlane {
    pub fn new(norm: NormKind) -> Result<Self> {
        Ok(NormedPlane { norm: norm.validate()? })
    }

    pub fn dist(&self, a: Point, b: Point) -> f64 {
        self.norm.dist(a, b)
    }

    pub fn matrix(&self, pts: &[Point]) -> DistMatrix {
        DistMatrix::from_fn(pts.len(), |i, j| self.dist(pts[i], pts[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> MetricGraph {
        let edges = (0..n - 1).map(|i| Edge { u: i, v: i + 1, length: 1.0 }).collect();
        MetricGraph::new(n, None, edges, Ambient::Path).unwrap()
    }

    #[test]
    fn path_graph_distance() {
        assert_eq!(path_graph(3).path_metric().get(0, 2), 2.0);
    }

    #[test]
    fn isolated_vertices_are_infinitely_far() {
        let g = MetricGraph::new(2, None, vec![], Ambient::Path).unwrap();
        assert!(g.path_metric().get(0, 1).is_infinite());
        assert!(qc_constants(&g).space.is_infinite());
        assert!(!g.is_connected());
    }

    #[test]
    fn four_cycle_opposite_corners() {
        let edges = (0..4).map(|i| Edge { u: i, v: (i + 1) % 4, length: 1.0 }).collect();
        let g = MetricGraph::new(4, None, edges, Ambient::Path).unwrap();
        assert_eq!(g.path_metric().get(0, 2), 2.0);
        assert_eq!(qc_constants(&g).space, 1.0);
    }

    #[test]
    fn v_detour_qc_is_two() {
        let h = (1.0f64 - 0.25).sqrt();
        let coords = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h)];
        let g = MetricGraph::embedded(coords, &[(0, 2), (2, 1)], Ambient::Euclidean).unwrap();
        let qc = qc_constants(&g);
        assert!((qc.pair.get(0, 1) - 2.0).abs() < 1e-12);
        assert!((qc.space - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_edges() {
        let coords = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let e = vec![Edge { u: 0, v: 1, length: 0.5 }];
        assert!(MetricGraph::new(2, Some(coords), e, Ambient::Euclidean).is_err());
    }

    #[test]
    fn finite_space_rejects_triangle_violation() {
        let d = DistMatrix::from_rows(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]).unwrap();
        assert!(FiniteMetricSpace::new(vec!["a".into(), "b".into(), "c".into()], d).is_err());
    }

    #[test]
    fn predecessor_ties_pick_lowest_index() {
        // 0 - 1 - 3 and 0 - 2 - 3 with equal lengths
        let edges = vec![
            Edge { u: 0, v: 2, length: 1.0 },
            Edge { u: 2, v: 3, length: 1.0 },
            Edge { u: 0, v: 1, length: 1.0 },
            Edge { u: 1, v: 3, length: 1.0 },
        ];
        let g = MetricGraph::new(4, None, edges, Ambient::Path).unwrap();
        assert_eq!(g.shortest_path_tree(0).path_to(3).unwrap(), vec![0, 1, 3]);
    }
}
