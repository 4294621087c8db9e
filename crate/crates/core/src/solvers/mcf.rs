//! Successive shortest augmenting paths with Johnson potentials.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::debug;

use crate::error::{Error, Result};

/// Tolerance on the total divergence of a network.
pub const DIVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
    /// `f64::INFINITY` for uncapacitated arcs.
    pub capacity: f64,
}

/// A directed network with nonnegative costs and per-node signed supply.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
    /// Positive entries are sources, negative entries are sinks.
    pub supply: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
            supply: vec![0.0; nodes],
        }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cost: f64, capacity: f64) -> usize {
        self.arcs.push(Arc { u, v, cost, capacity });
        self.arcs.len() - 1
    }

    /// Adds the pair of uncapacitated arcs `u → v` and `v → u`.
    pub fn add_edge(&mut self, u: usize, v: usize, cost: f64) -> (usize, usize) {
        (self.add_arc(u, v, cost, f64::INFINITY), self.add_arc(v, u, cost, f64::INFINITY))
    }

    fn validate(&self) -> Result<()> {
        if self.supply.len() != self.nodes {
            return Err(Error::DimensionMismatch("supply length differs from node count".into()));
        }
        for a in &self.arcs {
            if a.u >= self.nodes || a.v >= self.nodes {
                return Err(Error::OffSpace(a.u.max(a.v)));
            }
            if !(a.cost >= 0.0 && a.cost.is_finite()) {
                return Err(Error::invalid("arc costs must be finite and ≥ 0"));
            }
            if !(a.capacity > 0.0) {
                return Err(Error::invalid("arc capacities must be positive"));
            }
        }
        if self.supply.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("non-finite supply"));
        }
        let total: f64 = self.supply.iter().sum();
        if total.abs() > DIVERGENCE_TOL {
            return Err(Error::Unbalanced(total));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub flow: Vec<f64>,
    pub cost: f64,
    /// Dual labels with `π(v) − π(u) ≤ cost(u, v)` on every arc and equality
    /// on arcs that carry flow.
    pub potential: Vec<f64>,
    pub augmentations: usize,
}

impl FlowSolution {
    /// `cost(u, v) + π(u) − π(v)`.
    pub fn reduced_cost(&self, arc: &Arc) -> f64 {
        arc.cost + self.potential[arc.u] - self.potential[arc.v]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on node index
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Residual arc: index into the original arcs plus direction.
#[derive(Clone, Copy)]
struct Res {
    to: usize,
    arc: usize,
    forward: bool,
}

/// Solves the min-cost flow problem by successive shortest paths.
///
/// A super source feeds every supply node and a super sink drains every
/// demand node; both are internal and not reported.
pub fn min_cost_flow(net: &FlowNetwork) -> Result<FlowSolution> {
    net.validate()?;
    let n = net.nodes;
    let (src, snk) = (n, n + 1);
    let total_nodes = n + 2;

    // Original arcs first, then source and sink arcs, all in index order.
    let mut arcs: Vec<Arc> = net.arcs.clone();
    let scale = net.supply.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
    let eps = 1e-13 * scale;
    for (v, &s) in net.supply.iter().enumerate() {
        if s > eps {
            arcs.push(Arc { u: src, v, cost: 0.0, capacity: s });
        } else if s < -eps {
            arcs.push(Arc { u: v, v: snk, cost: 0.0, capacity: -s });
        }
    }
    let mut adj: Vec<Vec<Res>> = vec![Vec::new(); total_nodes];
    for (k, a) in arcs.iter().enumerate() {
        adj[a.u].push(Res { to: a.v, arc: k, forward: true });
        adj[a.v].push(Res { to: a.u, arc: k, forward: false });
    }
    let mut flow = vec![0.0; arcs.len()];
    let residual = |flow: &[f64], r: &Res| {
        if r.forward {
            arcs[r.arc].capacity - flow[r.arc]
        } else {
            flow[r.arc]
        }
    };

    // Bellman–Ford for the initial potentials; with nonnegative costs this
    // settles immediately but keeps the labels valid for any acyclic input.
    let mut h = vec![0.0; total_nodes];
    for _ in 0..total_nodes {
        let mut changed = false;
        for a in &arcs {
            if h[a.u] + a.cost < h[a.v] {
                h[a.v] = h[a.u] + a.cost;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let need: f64 = net.supply.iter().filter(|s| **s > eps).sum();
    let mut sent = 0.0;
    let mut augmentations = 0;
    let mut dist = vec![f64::INFINITY; total_nodes];
    let mut pred: Vec<Option<Res>> = vec![None; total_nodes];
    let mut prev_node = vec![usize::MAX; total_nodes];
    while need - sent > eps {
        dist.fill(f64::INFINITY);
        pred.fill(None);
        let mut done = vec![false; total_nodes];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry { dist: 0.0, node: src });
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for r in &adj[u] {
                if residual(&flow, r) <= eps || done[r.to] {
                    continue;
                }
                let c = if r.forward { arcs[r.arc].cost } else { -arcs[r.arc].cost };
                let reduced = (c + h[u] - h[r.to]).max(0.0);
                let nd = d + reduced;
                if nd < dist[r.to] {
                    dist[r.to] = nd;
                    pred[r.to] = Some(*r);
                    prev_node[r.to] = u;
                    heap.push(Entry { dist: nd, node: r.to });
                }
            }
        }
        if !dist[snk].is_finite() {
            return Err(Error::Infeasible(format!(
                "{:.3e} units of supply cannot reach any demand",
                need - sent
            )));
        }
        let cap = dist[snk];
        for v in 0..total_nodes {
            h[v] += dist[v].min(cap);
        }
        let mut bottleneck = need - sent;
        let mut v = snk;
        while v != src {
            let r = pred[v].expect("path to sink");
            bottleneck = bottleneck.min(residual(&flow, &r));
            v = prev_node[v];
        }
        let mut v = snk;
        while v != src {
            let r = pred[v].expect("path to sink");
            if r.forward {
                flow[r.arc] += bottleneck;
            } else {
                flow[r.arc] -= bottleneck;
            }
            v = prev_node[v];
        }
        sent += bottleneck;
        augmentations += 1;
        debug!("augmentation {augmentations}: {bottleneck:.6e} units at reduced length {cap:.6e}");
    }

    let m = net.arcs.len();
    flow.truncate(m);
    let cost = flow.iter().zip(&net.arcs).map(|(f, a)| f * a.cost).sum();
    h.truncate(n);
    Ok(FlowSolution {
        flow,
        cost,
        potential: h,
        augmentations,
    })
}
