use current1d::currents::{GraphChain, Molecule};
use current1d::fixtures;
use current1d::geometry::Point;
use current1d::rng::SeedTree;
use current1d::spaces::{Ambient, DistMatrix, Edge, MetricGraph};
use current1d::transport::{ae_norm, check_ae_certificate, isomorphism_check, minimal_filling};
use current1d::Error;
use proptest::prelude::*;
use rand::Rng;

fn line_metric(xs: &[f64]) -> DistMatrix {
    DistMatrix::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs())
}

fn unit_graph(n: usize, pairs: &[(usize, usize)]) -> MetricGraph {
    MetricGraph::new(n, None, pairs.iter().map(|&(u, v)| Edge { u, v, length: 1.0 }).collect(), Ambient::Path).unwrap()
}

#[test]
fn dipole_costs_the_distance() {
    let d = line_metric(&[0.0, 2.5]);
    let r = ae_norm(&Molecule::dipole(1, 0), &d).unwrap();
    assert_eq!(r.value, 2.5);
    assert!(check_ae_certificate(&Molecule::dipole(1, 0), &d, &r, 1e-12));
}

#[test]
fn three_points_on_a_line() {
    let d = line_metric(&[0.0, 1.0, 3.0]);
    let m = Molecule::new([(0, 1.0), (1, -2.0), (2, 1.0)]).unwrap();
    let r = ae_norm(&m, &d).unwrap();
    assert!((r.value - 3.0).abs() < 1e-12);
    assert!((r.coupling_cost(|p, q| d.get(p, q)) - 3.0).abs() < 1e-12);
}

#[test]
fn zero_molecule() {
    assert_eq!(ae_norm(&Molecule::zero(), &line_metric(&[0.0, 1.0])).unwrap().value, 0.0);
}

#[test]
fn unbalanced_and_off_space_molecules_are_rejected() {
    assert!(Molecule::new([(0usize, 1.0)]).is_err());
    let m = Molecule::dipole(5usize, 0);
    assert!(matches!(ae_norm(&m, &line_metric(&[0.0, 1.0])), Err(Error::OffSpace(5))));
}

#[test]
fn filling_examples() {
    let edge = unit_graph(2, &[(0, 1)]);
    let f = minimal_filling(&Molecule::dipole(1, 0), &edge).unwrap();
    assert_eq!(f.mass, 1.0);
    assert_eq!(f.chain.boundary(), Molecule::dipole(1, 0));
    let square = unit_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    assert_eq!(minimal_filling(&Molecule::dipole(2, 0), &square).unwrap().mass, 2.0);
    let (g, _) = fixtures::v_detour(2.0).unwrap();
    let m = Molecule::dipole(1, 0);
    assert!((minimal_filling(&m, &g).unwrap().mass - 2.0).abs() < 1e-12);
    assert!((ae_norm(&m, &g.ambient_matrix()).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn components_must_balance() {
    let g = unit_graph(4, &[(0, 1), (2, 3)]);
    assert!(matches!(minimal_filling(&Molecule::dipole(2, 0), &g), Err(Error::Infeasible(_))));
    let t = GraphChain::from_vertex_path(&g, &[0, 1], 1.0).unwrap();
    assert!(matches!(isomorphism_check(&t, &g), Err(Error::Disconnected)));
}

#[test]
fn geodesic_graph_has_equal_norms() {
    let g = unit_graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]);
    let t = GraphChain::from_vertex_path(&g, &[0, 1, 2, 3], 1.0).unwrap();
    let r = isomorphism_check(&t, &g).unwrap();
    assert!((r.ae_ambient - r.filling_mass).abs() < 1e-7);
    assert_eq!(r.geodesic_ok, Some(true));
    assert!(r.passed());
}

#[test]
fn v_detour_bounds_are_tight() {
    let (g, t) = fixtures::v_detour(2.0).unwrap();
    let r = isomorphism_check(&t, &g).unwrap();
    assert!((r.ae_ambient - 1.0).abs() < 1e-12);
    assert!((r.filling_mass - 2.0).abs() < 1e-12);
    assert!((r.qc - 2.0).abs() < 1e-12);
    assert!(r.lower_ok && r.upper_ok);
}

fn random_chain<R: Rng>(rng: &mut R, g: &MetricGraph) -> GraphChain {
    let mut weights = Vec::new();
    for e in 0..g.edges().len() {
        if rng.random_bool(0.4) {
            weights.push((e, rng.random_range(-2.0..2.0)));
        }
    }
    GraphChain::from_edge_weights(g, &weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filling_equals_intrinsic_ae(seed in any::<u64>(), n in 3usize..=30) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let k = rng.random_range(2..=n.min(10));
        let m = fixtures::random_molecule(&mut rng, n, k).unwrap();
        let fill = minimal_filling(&m, &g).unwrap();
        let ae = ae_norm(&m, g.path_metric()).unwrap();
        prop_assert!((fill.mass - ae.value).abs() <= 1e-7);
        prop_assert!((fill.chain.mass() - fill.mass).abs() <= 1e-9);
        prop_assert!(fill.chain.boundary().max_atom_diff(&m) <= 1e-9);
    }

    #[test]
    fn ae_certificates_hold(seed in any::<u64>(), n in 3usize..=30) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let k = rng.random_range(2..=n.min(10));
        let m = fixtures::random_molecule(&mut rng, n, k).unwrap();
        for d in [g.ambient_matrix(), g.path_metric().clone()] {
            let r = ae_norm(&m, &d).unwrap();
            prop_assert!((r.coupling_cost(|p, q| d.get(p, q)) - r.value).abs() <= 1e-9);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((r.potential[i] - r.potential[j]).abs() <= d.get(i, j) + 1e-9);
                }
            }
            let paired: f64 = m.atoms().iter().map(|&(p, w)| w * r.potential[p]).sum();
            prop_assert!(paired >= r.value - 1e-7);
        }
    }

    #[test]
    fn norms_scale_with_edge_lengths(seed in any::<u64>(), lambda in 0.01f64..100.0) {
        let mut rng = SeedTree::new(seed).rng();
        let n = rng.random_range(3..=20);
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let path = MetricGraph::new(n, None, g.edges().to_vec(), Ambient::Path).unwrap();
        let scaled = path.scaled(lambda).unwrap();
        let m = fixtures::random_molecule(&mut rng, n, 4).unwrap();
        let a = ae_norm(&m, path.path_metric()).unwrap().value;
        let b = ae_norm(&m, scaled.path_metric()).unwrap().value;
        prop_assert!((b - lambda * a).abs() <= 1e-9 * lambda.max(1.0) * (1.0 + a));
        let fa = minimal_filling(&m, &path).unwrap().mass;
        let fb = minimal_filling(&m, &scaled).unwrap().mass;
        prop_assert!((fb - lambda * fa).abs() <= 1e-9 * lambda.max(1.0) * (1.0 + fa));
    }

    #[test]
    fn boundary_operator_has_norm_at_most_one(seed in any::<u64>(), n in 3usize..=20) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let t = random_chain(&mut rng, &g);
        let ae = ae_norm(&t.boundary(), &g.ambient_matrix()).unwrap().value;
        prop_assert!(ae <= t.mass() + 1e-9);
    }

    #[test]
    fn isomorphism_bounds_hold(seed in any::<u64>(), n in 3usize..=30) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let t = random_chain(&mut rng, &g);
        let r = isomorphism_check(&t, &g).unwrap();
        prop_assert!(r.lower_ok && r.upper_ok, "{:?}", r);
        prop_assert!(r.ae_ambient / r.qc <= r.filling_mass + 1e-7);
        prop_assert!(r.filling_mass <= r.mass + 1e-9);
    }
}

#[test]
fn embedded_points_use_the_plane_distance() {
    let coords = vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)];
    let g = MetricGraph::embedded(coords, &[(0, 1)], Ambient::Euclidean).unwrap();
    assert_eq!(g.ambient_dist(0, 1), 5.0);
}
