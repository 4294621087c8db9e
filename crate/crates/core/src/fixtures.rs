//! Named test instances and seeded generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::approximation::{CurveEntry, CurveMeasure};
use crate::currents::{ClosedSet, GraphChain, Molecule, PlaneChain, Polyline, Primitive};
use crate::decomposition::EdgeFlow;
use crate::error::Result;
use crate::geometry::{NormKind, Point};
use crate::solvers::FlowNetwork;
use crate::spaces::{Ambient, MetricGraph};

/// Endpoints `(0,0)`, `(1,0)` joined only through an apex, so that `qc = c`.
///
/// Returns the graph and the chain `⟦0 → 2 → 1⟧` whose boundary is `δ₁ − δ₀`.
pub fn v_detour(c: f64) -> Result<(MetricGraph, GraphChain)> {
    let h = (0.25 * c * c - 0.25).max(0.0).sqrt();
    let coords = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h)];
    let g = MetricGraph::embedded(coords, &[(0, 2), (2, 1)], Ambient::Euclidean)?;
    let t = GraphChain::from_vertex_path(&g, &[0, 2, 1], 1.0)?;
    Ok((g, t))
}

/// A connected graph on `n` random points of the unit square.
///
/// A random spanning tree is grown first, then about `n/2` extra edges are added.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> Result<MetricGraph> {
    let n = n.max(2);
    let coords: Vec<Point> = (0..n).map(|_| Point::new(rng.random(), rng.random())).collect();
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for _ in 0..n / 2 {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && !pairs.contains(&(u, v)) && !pairs.contains(&(v, u)) {
            pairs.push((u, v));
        }
    }
    MetricGraph::embedded(coords, &pairs, Ambient::Euclidean)
}

/// A balanced molecule with `k` atoms on distinct vertices below `n`.
pub fn random_molecule<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<Molecule<usize>> {
    let mut vs: Vec<usize> = (0..n).collect();
    vs.shuffle(rng);
    let k = k.clamp(2, n);
    let mut atoms: Vec<(usize, f64)> = vs[..k].iter().map(|&v| (v, rng.random_range(-1.0..1.0))).collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    atoms[0].1 -= total;
    Molecule::new(atoms)
}

/// Intervals of the stage-`k` fat Cantor set: at stage `j` an open middle
/// interval of length `4^{−j}` is removed from each of the `2^{j−1}` pieces.
pub fn fat_cantor_intervals(k: usize) -> Vec<(f64, f64)> {
    let mut iv = vec![(0.0, 1.0)];
    for j in 1..=k {
        let gap = 0.25f64.powi(j as i32);
        iv = iv
            .into_iter()
            .flat_map(|(a, b)| {
                let mid = 0.5 * (a + b);
                [(a, mid - 0.5 * gap), (mid + 0.5 * gap, b)]
            })
            .collect();
    }
    iv
}

/// `1/2 + 2^{−k−1}`.
pub fn fat_cantor_mass(k: usize) -> f64 {
    0.5 + 0.5f64.powi(k as i32 + 1)
}

/// The stage-`k` set on the x-axis as a unit-weight chain.
pub fn fat_cantor_chain(k: usize, norm: NormKind) -> PlaneChain {
    let mut c = PlaneChain::zero();
    for (a, b) in fat_cantor_intervals(k) {
        c.push(PlaneChain::segment(Point::new(a, 0.0), Point::new(b, 0.0), 1.0, norm).pieces[0]);
    }
    c
}

/// Boxes `[a, b] × [−h, h]` over the stage-`k` intervals.
pub fn fat_cantor_boxes(k: usize, h: f64) -> Result<ClosedSet> {
    ClosedSet::new(
        fat_cantor_intervals(k)
            .into_iter()
            .map(|(a, b)| Primitive::Box {
                min: Point::new(a, -h),
                max: Point::new(b, h),
            })
            .collect(),
    )
}

/// A polyline of `pieces` random steps of size at most `step` from `start`.
pub fn random_polyline<R: Rng>(rng: &mut R, start: Point, pieces: usize, step: f64) -> Polyline {
    let mut pts = vec![start];
    let mut p = start;
    for _ in 0..pieces.max(1) {
        loop {
            let q = p + Point::new(rng.random_range(-step..step), rng.random_range(-step..step));
            if q != p {
                p = q;
                break;
            }
        }
        pts.push(p);
    }
    Polyline::new(pts).expect("distinct consecutive points")
}

/// `γ` with every vertex moved by at most `amp` in each coordinate.
pub fn jitter<R: Rng>(rng: &mut R, g: &Polyline, amp: f64) -> Polyline {
    let pts = g.points.iter().map(|&p| p + Point::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp))).collect();
    Polyline::new(pts).unwrap_or_else(|_| g.clone())
}

/// A monotone lattice staircase of `right + up` unit steps of size `h`, in random order.
pub fn staircase<R: Rng>(rng: &mut R, start: Point, right: usize, up: usize, h: f64) -> Polyline {
    let mut moves: Vec<bool> = std::iter::repeat_n(true, right).chain(std::iter::repeat_n(false, up)).collect();
    moves.shuffle(rng);
    let mut pts = vec![start];
    let (mut i, mut j) = (0usize, 0usize);
    for m in moves {
        if m {
            i += 1;
        } else {
            j += 1;
        }
        pts.push(Point::new(start.x + h * i as f64, start.y + h * j as f64));
    }
    Polyline::new(pts).expect("unit steps")
}

/// A pair of lattice curves whose difference is fillable on the lattice:
/// either two staircases with shared endpoints or a staircase and an
/// axis-parallel lattice translate of it.
pub fn grid_pair<R: Rng>(rng: &mut R, h: f64) -> (Polyline, Polyline) {
    let right = rng.random_range(1..5);
    let up = rng.random_range(0..4);
    let start = Point::new(h * rng.random_range(0..3) as f64, h * rng.random_range(0..3) as f64);
    let g0 = staircase(rng, start, right, up, h);
    let g1 = if rng.random_bool(0.5) {
        staircase(rng, start, right, up, h)
    } else {
        let k = rng.random_range(1..3) as f64 * h;
        let w = if rng.random_bool(0.5) { Point::new(k, 0.0) } else { Point::new(0.0, k) };
        g0.translated(w)
    };
    (g0, g1)
}

/// `count` translates of `base` by `j·spacing·dir`, in input order.
pub fn translate_family(base: &Polyline, dir: Point, spacing: f64, count: usize, weight: f64, norm: NormKind) -> Result<CurveMeasure> {
    let entries = (0..count)
        .map(|j| CurveEntry {
            w: weight,
            polyline: base.translated((j as f64 * spacing) * dir),
        })
        .collect();
    CurveMeasure::new(entries, norm)
}

/// Up to `max_curves` random polylines of length at most `cap`, clustered around a few seeds.
pub fn random_curve_measure<R: Rng>(rng: &mut R, max_curves: usize, cap: f64, norm: NormKind) -> Result<CurveMeasure> {
    let n = rng.random_range(1..=max_curves.max(1));
    let mut seeds = Vec::with_capacity(3);
    for _ in 0..3 {
        let start = Point::new(rng.random(), rng.random());
        let pieces = rng.random_range(1..5);
        seeds.push(random_polyline(rng, start, pieces, 0.3));
    }
    let mut entries = Vec::with_capacity(n);
    while entries.len() < n {
        let base = &seeds[rng.random_range(0..seeds.len())];
        let g = jitter(rng, base, 0.05);
        if g.length(norm) <= cap {
            entries.push(CurveEntry {
                w: rng.random_range(0.1..1.0),
                polyline: g,
            });
        }
    }
    CurveMeasure::new(entries, norm)
}

/// Staircases with `steps` unit steps from nearby lattice points, so that all
/// chords of a `steps`-cell partition are lattice edges.
pub fn grid_curve_measure<R: Rng>(rng: &mut R, curves: usize, steps: usize, h: f64) -> Result<CurveMeasure> {
    let entries = (0..curves.max(1))
        .map(|_| {
            let right = rng.random_range(0..=steps);
            let start = Point::new(h * rng.random_range(0..2) as f64, h * rng.random_range(0..2) as f64);
            CurveEntry {
                w: rng.random_range(1..4) as f64 * 0.25,
                polyline: staircase(rng, start, right, steps - right, h),
            }
        })
        .collect();
    CurveMeasure::new(entries, NormKind::L2)
}

/// A sign-consistent flow: a positive sum of paths that increase along a random vertex order.
pub fn random_acyclic_flow<R: Rng>(rng: &mut R, g: &MetricGraph, paths: usize) -> Result<EdgeFlow> {
    let n = g.vertex_count();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let mut w = vec![0.0; g.edges().len()];
    for _ in 0..paths {
        let mut v = rng.random_range(0..n);
        let weight = rng.random_range(0.1..2.0);
        for _ in 0..n {
            let up: Vec<(usize, usize)> = g.neighbors(v).iter().copied().filter(|&(nb, _)| rank[nb] > rank[v]).collect();
            if up.is_empty() || (rng.random_bool(0.2)) {
                break;
            }
            let (nb, e) = up[rng.random_range(0..up.len())];
            w[e] += if g.edges()[e].u == v { weight } else { -weight };
            v = nb;
        }
    }
    EdgeFlow::new(g, w)
}

/// A bipartite transportation instance with `m` sources and `n` sinks.
pub fn random_transportation<R: Rng>(rng: &mut R, m: usize, n: usize) -> FlowNetwork {
    let mut net = FlowNetwork::new(m + n);
    for i in 0..m {
        for j in 0..n {
            net.add_arc(i, m + j, rng.random_range(0.0..10.0), f64::INFINITY);
        }
    }
    let supply: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
    let total: f64 = supply.iter().sum();
    let mut demand: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
    let dsum: f64 = demand.iter().sum();
    demand.iter_mut().for_each(|d| *d *= total / dsum);
    let drift: f64 = total - demand.iter().sum::<f64>();
    demand[0] += drift;
    for i in 0..m {
        net.supply[i] = supply[i];
    }
    for j in 0..n {
        net.supply[m + j] = -demand[j];
    }
    net
}
