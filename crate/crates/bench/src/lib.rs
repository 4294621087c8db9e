//! Seeded instances shared by the benchmarks.

use current1d::currents::{GraphChain, PlaneChain};
use current1d::fixtures;
use current1d::flatnorm::{CubicalComplex, EdgeChain};
use current1d::geometry::{NormKind, Point};
use current1d::rng::SeedTree;
use current1d::solvers::FlowNetwork;
use current1d::spaces::MetricGraph;

const SEED: u64 = 0x5eed;

pub fn transportation(m: usize, n: usize) -> FlowNetwork {
    fixtures::random_transportation(&mut SeedTree::new(SEED).child((m * 1000 + n) as u64).rng(), m, n)
}

/// A random embedded graph with a closed-up random chain on it.
pub fn graph_with_chain(n: usize) -> (MetricGraph, GraphChain) {
    let mut rng = SeedTree::new(SEED).named("graph").child(n as u64).rng();
    let g = fixtures::random_graph(&mut rng, n).expect("valid graph");
    let f = fixtures::random_acyclic_flow(&mut rng, &g, n / 2 + 1).expect("valid flow");
    let t = f.to_chain(&g).expect("flow on graph");
    (g, t)
}

/// The boundary of a `k × k` lattice square on a grid with a one-cell margin.
pub fn lattice_square(k: usize) -> (CubicalComplex, EdgeChain) {
    let cx = CubicalComplex::new(Point::ORIGIN, 1.0, k + 2, k + 2).expect("valid complex");
    let (a, b) = (1.0, 1.0 + k as f64);
    let corners = [Point::new(a, a), Point::new(b, a), Point::new(b, b), Point::new(a, b)];
    let mut c = PlaneChain::zero();
    for i in 0..4 {
        c = c.plus(&PlaneChain::segment(corners[i], corners[(i + 1) % 4], 1.0, NormKind::L2));
    }
    let t = cx.snap(&c).expect("lattice chain");
    (cx, t)
}
