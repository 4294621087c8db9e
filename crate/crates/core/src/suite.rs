//! The seeded property battery behind `current1d suite`.
//!
//! Every check walks a family of instances, records by how much each
//! asserted inequality is violated, and fails if any excess is positive.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::approximation::{approximate, truncate};
use crate::currents::{restrict_chain, ClosedSet, GraphChain, PlaneChain, Primitive, TestForm};
use crate::decomposition::{decompose_flow, fragment_representation, rickman_row, EdgeFlow};
use crate::fixtures;
use crate::flatnorm::{flat_norm, flat_upper_bound_pair, CubicalComplex};
use crate::geometry::{Line, NormKind, Point};
use crate::homotopy::homotopy_fill;
use crate::io::lenient_f64;
use crate::rng::SeedTree;
use crate::solvers::{min_cost_flow, simplex_lp, FlowNetwork, LinearProgram};
use crate::spaces::{qc_constants, Ambient, MetricGraph};
use crate::structure::normalize;
use crate::transport::{ae_norm, ae_norm_plane, check_ae_certificate, isomorphism_check, minimal_filling};
use crate::Result;

/// Outcome of one family of assertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub assertions: usize,
    pub failures: usize,
    /// Largest `lhs − rhs − tol` seen; negative means every assertion had slack.
    #[serde(with = "lenient_f64")]
    pub worst_excess: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check {
            name: name.into(),
            cases: 0,
            assertions: 0,
            failures: 0,
            worst_excess: f64::NEG_INFINITY,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.assertions > 0
    }

    /// Asserts `lhs ≤ rhs + tol`.
    fn le(&mut self, what: &str, lhs: f64, rhs: f64, tol: f64) {
        let excess = if lhs.is_nan() || rhs.is_nan() { f64::INFINITY } else { lhs - rhs - tol };
        self.assertions += 1;
        self.worst_excess = self.worst_excess.max(excess);
        if excess > 0.0 {
            self.failures += 1;
            if self.notes.len() < 8 {
                self.notes.push(format!("case {}: {what}: {lhs} > {rhs} + {tol}", self.cases));
            }
        }
    }

    /// Asserts `|a − b| ≤ tol`.
    fn close(&mut self, what: &str, a: f64, b: f64, tol: f64) {
        self.le(what, (a - b).abs(), 0.0, tol);
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.le(what, if ok { 0.0 } else { 1.0 }, 0.0, 0.0);
    }

    fn error(&mut self, what: &str, e: crate::Error) {
        self.assertions += 1;
        self.failures += 1;
        self.worst_excess = f64::INFINITY;
        if self.notes.len() < 8 {
            self.notes.push(format!("case {}: {what}: {e}", self.cases));
        }
    }

    /// Runs one case, turning an error into a failure.
    fn case(&mut self, what: &str, f: impl FnOnce(&mut Check) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(what, e);
        }
        self.cases += 1;
    }
}

/// Aggregate of a battery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn new(seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.passed()).count();
        SuiteReport {
            seed,
            failed: checks.len() - passed,
            passed,
            checks,
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Sizes of the instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSizes {
    pub sandwich: usize,
    pub rickman: usize,
    pub homotopy: usize,
    pub grid_pairs: usize,
    pub approximation: usize,
    pub cantor_stages: usize,
    pub flows: usize,
    pub restrictions: usize,
    pub solver: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            sandwich: 50,
            rickman: 32,
            homotopy: 100,
            grid_pairs: 50,
            approximation: 20,
            cantor_stages: 6,
            flows: 50,
            restrictions: 20,
            solver: 100,
        }
    }
}

/// Runs every check in a fixed order.
pub fn run(seed: u64, sizes: &SuiteSizes) -> SuiteReport {
    let tree = SeedTree::new(seed);
    let checks = vec![
        sandwich(&tree.named("sandwich"), sizes.sandwich),
        optimal_constants(),
        rickman(sizes.rickman),
        homotopy(&tree.named("homotopy"), sizes.homotopy, sizes.grid_pairs),
        approximation(&tree.named("approximation"), sizes.approximation),
        normalization(sizes.cantor_stages),
        decomposition(&tree.named("decomposition"), sizes.flows, sizes.restrictions),
        solvers(&tree.named("solvers"), sizes.solver),
        flat_closed_forms(),
    ];
    SuiteReport::new(seed, checks)
}

/// `qc⁻¹·‖m‖_d ≤ filling ≤ qc·‖m‖_d` and `filling = ‖m‖_{d_ℓ}` on random embedded graphs.
pub fn sandwich(tree: &SeedTree, instances: usize) -> Check {
    let mut c = Check::new("isomorphism sandwich");
    for i in 0..instances {
        let mut rng = tree.child(i as u64).rng();
        c.case("sandwich", |c| {
            let n = rng.random_range(4..=30);
            let g = fixtures::random_graph(&mut rng, n)?;
            let k = rng.random_range(2..=n.min(8));
            let m = fixtures::random_molecule(&mut rng, n, k)?;
            let qc = qc_constants(&g).space;
            let amb = g.ambient_matrix();
            let ae_d = ae_norm(&m, &amb)?;
            let ae_l = ae_norm(&m, g.path_metric())?;
            let fill = minimal_filling(&m, &g)?;
            c.le("qc⁻¹·ae(d) ≤ filling", ae_d.value / qc, fill.mass, 1e-7);
            c.le("filling ≤ qc·ae(d)", fill.mass, qc * ae_d.value, 1e-7);
            c.close("filling = ae(d_ℓ)", fill.mass, ae_l.value, 1e-7);
            c.close("∂filling = m", fill.chain.boundary().max_atom_diff(&m), 0.0, 1e-9);
            c.holds("Kantorovich certificate", check_ae_certificate(&m, &amb, &ae_d, 1e-7));
            Ok(())
        });
    }
    c
}

/// The V-detour family attains `filling / ae = C`.
pub fn optimal_constants() -> Check {
    let mut c = Check::new("optimal-constant witness");
    for detour in [1.5, 2.0, 4.0] {
        c.case("v-detour", |c| {
            let (g, t) = fixtures::v_detour(detour)?;
            let r = isomorphism_check(&t, &g)?;
            c.close("filling / ae(d) = C", r.filling_mass / r.ae_ambient, detour, 1e-9);
            c.close("qc = C", r.qc, detour, 1e-9);
            c.holds("both bounds", r.passed());
            Ok(())
        });
    }
    c
}

/// `‖∂T_s‖_{AE(d_ℓ)} = 2` and `M(T_s) = 2` at `s = j/n`, `j = 1, …, n`.
pub fn rickman(n: usize) -> Check {
    let mut c = Check::new("rickman rug lower bound");
    for j in 1..=n {
        let s = j as f64 / n as f64;
        c.case("rickman", |c| {
            let row = rickman_row(0.5, s, 4)?;
            c.close("ae(∂T_s, d_ℓ) = 2", row.ae_intrinsic, 2.0, 1e-6);
            c.close("M(T_s) = 2", row.mass, 2.0, 1e-12);
            c.close("filling = ae(d_ℓ)", row.filling_mass, row.ae_intrinsic, 1e-7);
            Ok(())
        });
    }
    c
}

fn bbox(a: &PlaneChain, b: &PlaneChain) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in a.pieces.iter().chain(&b.pieces) {
        for q in [p.start, p.end] {
            lo = lo.min(q.x.min(q.y));
            hi = hi.max(q.x.max(q.y));
        }
    }
    (lo, hi)
}

/// Homotopy fillings on fuzzed pairs, then the LP cross-check on lattice pairs.
pub fn homotopy(tree: &SeedTree, pairs: usize, grid_pairs: usize) -> Check {
    let mut c = Check::new("homotopy lemma");
    let norms = [NormKind::L2, NormKind::L1, NormKind::Linf];
    for i in 0..pairs {
        let mut rng = tree.child(i as u64).rng();
        let norm = norms[i % norms.len()];
        c.case("homotopy", |c| {
            let start = Point::new(rng.random(), rng.random());
            let pieces = rng.random_range(1..6);
            let g0 = fixtures::random_polyline(&mut rng, start, pieces, 0.5);
            let g1 = if rng.random_bool(0.5) {
                fixtures::jitter(&mut rng, &g0, 0.1)
            } else {
                let start = Point::new(rng.random(), rng.random());
                let pieces = rng.random_range(1..6);
                fixtures::random_polyline(&mut rng, start, pieces, 0.5)
            };
            let fill = homotopy_fill(&g0, &g1, norm)?;
            let (lo, hi) = bbox(&PlaneChain::from_polyline(&g0, 1.0, norm), &PlaneChain::from_polyline(&g1, 1.0, norm));
            let panel = TestForm::panel(&mut rng, 20, lo, hi);
            c.le("boundary identity residual", fill.max_scaled_residual(&panel), 0.0, 1e-6);
            c.le("measured M(S) ≤ certS", fill.measured_s, fill.cert_s, 1e-6);
            c.le("M(R) ≤ certR", fill.r_chain.mass(), fill.cert_r, 1e-9);
            c.le("certS + certR ≤ pair bound", fill.cert_s + fill.cert_r, flat_upper_bound_pair(&g0, &g1, norm), 1e-9);
            Ok(())
        });
    }
    for i in 0..grid_pairs {
        let mut rng = tree.named("grid").child(i as u64).rng();
        c.case("grid pair", |c| {
            let h = 0.25;
            let (g0, g1) = fixtures::grid_pair(&mut rng, h);
            let fill = homotopy_fill(&g0, &g1, NormKind::L2)?;
            let c0 = PlaneChain::from_polyline(&g0, 1.0, NormKind::L2);
            let c1 = PlaneChain::from_polyline(&g1, 1.0, NormKind::L2);
            let cx = CubicalComplex::covering(&[&c0, &c1], h, 2)?;
            let t = cx.snap(&c0)?.minus(&cx.snap(&c1)?);
            let lp = flat_norm(&t, &cx)?;
            c.le("complex flat norm ≤ certS + certR", lp.value, fill.cert_s + fill.cert_r, 1e-6);
            c.le("complex flat norm ≤ pair bound", lp.value, flat_upper_bound_pair(&g0, &g1, NormKind::L2), 1e-7);
            c.le("t = r + ∂s", lp.decomposition_residual(&t, &cx), 0.0, 1e-8);
            Ok(())
        });
    }
    c
}

/// Mass non-increase, the LP check of the certificate and the halving of the clustering term.
pub fn approximation(tree: &SeedTree, measures: usize) -> Check {
    let mut c = Check::new("geodesic approximation");
    for i in 0..measures {
        let mut rng = tree.child(i as u64).rng();
        c.case("approximation", |c| {
            let eta = fixtures::random_curve_measure(&mut rng, 100, 4.0, NormKind::L2)?;
            let eta = truncate(&eta, 4.0)?.measure;
            let ap = approximate(&eta, 0.1, 0.125)?;
            c.le("M(P) ≤ M(N)", ap.p.mass(), eta.induced_mass(), 1e-9);

            let h = 0.25;
            let steps = 4;
            let curves = rng.random_range(2..=6);
            let grid = fixtures::grid_curve_measure(&mut rng, curves, steps, h)?;
            let ap = approximate(&grid, 0.3, 1.0 / steps as f64)?;
            c.le("M(P) ≤ M(N) on the lattice", ap.p.mass(), grid.induced_mass(), 1e-9);
            let n = grid.as_chain();
            let cx = CubicalComplex::covering(&[&n, &ap.p], h, 2)?;
            let lp = flat_norm(&cx.snap(&n)?.minus(&cx.snap(&ap.p)?), &cx)?;
            c.le("complex flat norm of N − P ≤ certificate", lp.value, ap.cert.flat_bound, 1e-6);

            let start = Point::new(rng.random(), rng.random());
            let pieces = rng.random_range(1..5);
            let base = fixtures::random_polyline(&mut rng, start, pieces, 0.3);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let k = [20, 22, 24][rng.random_range(0..3)];
            let q = rng.random_range(2..=4);
            let eps = 0.1;
            let fam = fixtures::translate_family(&base, Point::new(th.cos(), th.sin()), eps / (k as f64 - 0.5), k * q, 1.0 / (k * q) as f64, NormKind::L2)?;
            let coarse = approximate(&fam, eps, 0.25)?.cert.clustering_term;
            let fine = approximate(&fam, eps / 2.0, 0.25)?.cert.clustering_term;
            c.close("clustering term halves with ε", fine / coarse, 0.5, 0.1);
            Ok(())
        });
    }
    c
}

/// Normalization of fat-Cantor chains on the x-axis with `ε = 0.1`.
pub fn normalization(max_stage: usize) -> Check {
    let mut c = Check::new("hyperplane normalization");
    let axis = Line::x_axis();
    for k in 0..=max_stage {
        c.case("normalize", |c| {
            let t = fixtures::fat_cantor_chain(k, NormKind::L2);
            let exact: f64 = fixtures::fat_cantor_intervals(k).iter().map(|(a, b)| b - a).sum();
            c.close("M(T) matches the intervals", t.mass(), exact, 0.0);
            c.close("M(T) = 1/2 + 2^(−k−1)", t.mass(), fixtures::fat_cantor_mass(k), 0.0);
            let r = normalize(&t, &axis, 0.1, NormKind::L2)?;
            c.le("‖∂N‖_AE", r.boundary_residual, 0.0, 1e-9);
            c.le("‖∂N‖_AE recomputed", ae_norm_plane(&r.n.boundary(), NormKind::L2)?.value, 0.0, 1e-9);
            c.le("M(N) ≤ 2.1·M(T)", r.n.mass(), 2.1 * t.mass(), 1e-9);
            let back = restrict_chain(&r.n, &ClosedSet::line(axis), NormKind::L2)?;
            c.close("M(N⌊axis) = M(T)", back.mass(), t.mass(), 1e-9);
            c.le("reported restriction defect", r.restrict_mass_diff, 0.0, 1e-9);
            Ok(())
        });
    }
    c
}

fn graph_boundary(g: &MetricGraph, w: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; g.vertex_count()];
    for (e, &x) in g.edges().iter().zip(w) {
        b[e.v] += x;
        b[e.u] -= x;
    }
    b
}

fn random_closed_set<R: rand::Rng>(rng: &mut R, i: usize) -> Result<ClosedSet> {
    let prim = |rng: &mut R| -> Primitive {
        match rng.random_range(0..3) {
            0 => {
                let (x, y) = (rng.random_range(-0.2..0.8), rng.random_range(-0.2..0.8));
                Primitive::Box {
                    min: Point::new(x, y),
                    max: Point::new(x + rng.random_range(0.1..0.6), y + rng.random_range(0.1..0.6)),
                }
            }
            1 => Primitive::Ball {
                center: Point::new(rng.random(), rng.random()),
                radius: rng.random_range(0.1..0.5),
            },
            _ => {
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                Primitive::HalfPlane {
                    a: th.cos(),
                    b: th.sin(),
                    c: rng.random_range(-0.5..0.5),
                }
            }
        }
    };
    if i % 4 == 0 {
        return fixtures::fat_cantor_boxes(1 + i % 5, 2.0);
    }
    let count = rng.random_range(1..=3);
    ClosedSet::new((0..count).map(|_| prim(rng)).collect())
}

/// Flow decomposition identities and the fragment mass identity.
pub fn decomposition(tree: &SeedTree, flows: usize, restrictions: usize) -> Check {
    let mut c = Check::new("decomposition identities");
    for i in 0..flows {
        let mut rng = tree.child(i as u64).rng();
        c.case("decompose", |c| {
            let n = rng.random_range(5..=20);
            let g = fixtures::random_graph(&mut rng, n)?;
            let paths = rng.random_range(1..=6);
            let f = fixtures::random_acyclic_flow(&mut rng, &g, paths)?;
            let d = decompose_flow(&g, &f)?;
            let back = d.reassemble(&g);
            let worst = back.iter().zip(&f.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            c.le("per-edge reassembly", worst, 0.0, 1e-9);
            let curve_mass: f64 = d.curves().map(|k| k.weight * k.length(&g)).sum();
            let flow_mass: f64 = g.edges().iter().zip(&f.weights).map(|(e, w)| e.length * w.abs()).sum();
            c.close("mass additivity", curve_mass, flow_mass, 1e-9);
            c.le("reported mass defect", d.mass_defect.abs(), 0.0, 1e-9);
            let b = graph_boundary(&g, &f.weights);
            let (starts, ends) = d.marginals();
            for (v, &x) in b.iter().enumerate() {
                c.close("end marginal", ends.weight_at(v), x.max(0.0), 1e-9);
                c.close("start marginal", starts.weight_at(v), (-x).max(0.0), 1e-9);
            }
            if i < restrictions {
                let set = random_closed_set(&mut rng, i)?;
                let fr = fragment_representation(&d, &g, &f, &set, NormKind::L2)?;
                let direct = restrict_chain(&f.to_chain(&g)?.embed(&g, NormKind::L2)?, &set, NormKind::L2)?.mass();
                c.close("fragment mass identity", direct, fr.fragment_mass, 1e-9);
                c.le("reported identity residual", fr.mass_identity_residual, 0.0, 1e-9);
            }
            Ok(())
        });
    }
    for k in 0..=6 {
        c.case("cantor line", |c| {
            let g = MetricGraph::embedded(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], &[(0, 1)], Ambient::Euclidean)?;
            let f = EdgeFlow::from_chain(&GraphChain::from_vertex_path(&g, &[0, 1], 1.0)?, &g)?;
            let d = decompose_flow(&g, &f)?;
            let fr = fragment_representation(&d, &g, &f, &fixtures::fat_cantor_boxes(k, 0.5)?, NormKind::L2)?;
            let exact: f64 = fixtures::fat_cantor_intervals(k).iter().map(|(a, b)| b - a).sum();
            c.close("fragment mass = |K_k|", fr.fragment_mass, exact, 1e-9);
            c.le("identity residual", fr.mass_identity_residual, 0.0, 1e-9);
            Ok(())
        });
    }
    c
}

/// The linear program equivalent to a flow network: one column per arc.
pub fn transportation_lp(net: &FlowNetwork) -> LinearProgram {
    let mut lp = LinearProgram::new(net.nodes);
    lp.rhs = net.supply.clone();
    for a in &net.arcs {
        lp.add_var(a.cost, vec![(a.u, 1.0), (a.v, -1.0)]);
    }
    lp
}

/// Min-cost flow against the simplex method on transportation instances.
pub fn solvers(tree: &SeedTree, instances: usize) -> Check {
    let mut c = Check::new("solver cross-validation");
    for i in 0..instances {
        let mut rng = tree.child(i as u64).rng();
        c.case("transportation", |c| {
            let (m, n) = (rng.random_range(1..=10), rng.random_range(1..=10));
            let net = fixtures::random_transportation(&mut rng, m, n);
            let flow = min_cost_flow(&net)?;
            let lp = transportation_lp(&net);
            let sol = simplex_lp(&lp)?;
            c.close("mcf = simplex", flow.cost, sol.optimum, 1e-7);
            c.le("simplex duality gap", sol.duality_gap(&lp), 0.0, 1e-7 * (1.0 + sol.optimum.abs()));
            c.le("simplex primal residual", lp.residual(&sol.x), 0.0, 1e-8);
            let dual: f64 = -net.supply.iter().zip(&flow.potential).map(|(s, p)| s * p).sum::<f64>();
            c.close("mcf duality gap", flow.cost, dual, 1e-7);
            for (a, &x) in net.arcs.iter().zip(&flow.flow) {
                c.le("dual feasibility", -flow.reduced_cost(a), 0.0, 1e-9);
                if x > 1e-9 {
                    c.le("complementary slackness", flow.reduced_cost(a), 0.0, 1e-9);
                }
            }
            Ok(())
        });
    }
    c
}

fn rectangle_boundary(x0: f64, y0: f64, w: f64, h: f64) -> PlaneChain {
    let p = [Point::new(x0, y0), Point::new(x0 + w, y0), Point::new(x0 + w, y0 + h), Point::new(x0, y0 + h)];
    let mut c = PlaneChain::zero();
    for k in 0..4 {
        c = c.plus(&PlaneChain::segment(p[k], p[(k + 1) % 4], 1.0, NormKind::L2));
    }
    c
}

/// Unit square and `1×k` rectangles: the complex flat norm is `min(perimeter, area)`.
pub fn flat_closed_forms() -> Check {
    let mut c = Check::new("flat norm closed forms");
    c.case("unit square", |c| {
        let cx = CubicalComplex::new(Point::new(0.0, 0.0), 1.0, 3, 3)?;
        let t = cx.snap(&rectangle_boundary(1.0, 1.0, 1.0, 1.0))?;
        c.close("unit square", flat_norm(&t, &cx)?.value, 1.0, 1e-8);
        Ok(())
    });
    for k in 1..=8 {
        c.case("rectangle", |c| {
            let cx = CubicalComplex::new(Point::new(0.0, 0.0), 1.0, k + 2, 3)?;
            let t = cx.snap(&rectangle_boundary(1.0, 1.0, k as f64, 1.0))?;
            let kf = k as f64;
            c.close("1×k rectangle", flat_norm(&t, &cx)?.value, (2.0 + 2.0 * kf).min(kf), 1e-8);
            Ok(())
        });
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes() {
        let sizes = SuiteSizes {
            sandwich: 5,
            rickman: 4,
            homotopy: 6,
            grid_pairs: 4,
            approximation: 2,
            cantor_stages: 3,
            flows: 5,
            restrictions: 5,
            solver: 5,
        };
        let r = run(11, &sizes);
        for c in &r.checks {
            assert!(c.passed(), "{c:?}");
        }
        assert_eq!(run(11, &sizes), r);
    }
}
