use current1d::currents::{ClosedSet, Primitive, TestForm};
use current1d::decomposition::{decompose_flow, fragment_representation, rickman_row, rickman_rug, EdgeFlow};
use current1d::fixtures;
use current1d::geometry::{NormKind, Point};
use current1d::rng::SeedTree;
use current1d::spaces::{Ambient, MetricGraph};
use proptest::prelude::*;
use rand::Rng;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn square() -> MetricGraph {
    let coords = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
    MetricGraph::embedded(coords, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], Ambient::Euclidean).unwrap()
}

#[test]
fn rejects_malformed_flows() {
    let g = square();
    assert!(EdgeFlow::new(&g, vec![1.0; 3]).is_err());
    assert!(EdgeFlow::new(&g, vec![1.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
}

#[test]
fn circulation_plus_diagonal() {
    let g = square();
    let f = EdgeFlow::new(&g, vec![1.5, 1.5, 1.0, 1.0, -0.5]).unwrap();
    let d = decompose_flow(&g, &f).unwrap();
    assert_eq!(d.reassemble(&g), f.weights);
    assert!(d.paths.is_empty());
    assert!(d.mass_defect.abs() <= 1e-12);
    assert!((d.cycle_mass - f.mass(&g)).abs() <= 1e-12);
}

#[test]
fn paths_carry_the_boundary() {
    let g = square();
    let f = EdgeFlow::new(&g, vec![2.0, 2.0, 0.0, 0.0, -1.0]).unwrap();
    let d = decompose_flow(&g, &f).unwrap();
    assert_eq!(d.reassemble(&g), f.weights);
    let (starts, ends) = d.marginals();
    assert_eq!(ends.minus(&starts), f.to_chain(&g).unwrap().boundary());
}

#[test]
fn fragments_count_components() {
    let coords: Vec<Point> = (0..5).map(|i| p(i as f64, 0.0)).collect();
    let pairs: Vec<(usize, usize)> = (0..4).map(|i| (i, i + 1)).collect();
    let g = MetricGraph::embedded(coords, &pairs, Ambient::Euclidean).unwrap();
    let f = EdgeFlow::new(&g, vec![1.0; 4]).unwrap();
    let d = decompose_flow(&g, &f).unwrap();
    let set = ClosedSet::new(vec![
        Primitive::Box { min: p(0.5, -1.0), max: p(1.5, 1.0) },
        Primitive::Box { min: p(2.5, -1.0), max: p(3.0, 1.0) },
    ])
    .unwrap();
    let rep = fragment_representation(&d, &g, &f, &set, NormKind::L2).unwrap();
    assert_eq!(rep.fragments.len(), 1);
    assert_eq!(rep.rows[0].fragments, 2);
    assert!((rep.fragment_mass - 1.5).abs() <= 1e-12);
    assert!(rep.mass_identity_residual <= 1e-12);
}

#[test]
fn rickman_rows() {
    for j in 1..=16 {
        let s = j as f64 / 16.0;
        let row = rickman_row(0.5, s, 4).unwrap();
        assert!((row.ae_intrinsic - 2.0).abs() <= 1e-6, "{row:?}");
        assert!(row.filling_mass >= row.ae_intrinsic - 1e-9);
        assert_eq!(row.mass, 2.0);
        assert!((row.ae_ambient - 2.0 * s.sqrt()).abs() <= 1e-9);
    }
    assert!(rickman_rug(1.0, 0.5, 2).is_err());
    assert!(rickman_rug(0.5, 0.0, 2).is_err());
    assert!(rickman_rug(0.5, 0.5, 0).is_err());
}

fn random_set<R: Rng>(rng: &mut R) -> ClosedSet {
    let k = rng.random_range(1..=3);
    ClosedSet::new(
        (0..k)
            .map(|_| {
                let (x, y) = (rng.random_range(-0.2..0.9), rng.random_range(-0.2..0.9));
                if rng.random_bool(0.5) {
                    Primitive::Box { min: p(x, y), max: p(x + rng.random_range(0.05..0.6), y + rng.random_range(0.05..0.6)) }
                } else {
                    Primitive::Ball { center: p(x, y), radius: rng.random_range(0.05..0.5) }
                }
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn acyclic_flows_decompose_into_paths(seed in any::<u64>(), n in 3usize..20, paths in 1usize..8) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let f = fixtures::random_acyclic_flow(&mut rng, &g, paths).unwrap();
        let d = decompose_flow(&g, &f).unwrap();
        prop_assert!(d.cycles.is_empty());
        let back = d.reassemble(&g);
        for (a, b) in back.iter().zip(&f.weights) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let (starts, ends) = d.marginals();
        let boundary = f.to_chain(&g).unwrap().boundary();
        prop_assert!(ends.minus(&starts).max_atom_diff(&boundary) <= 1e-9);
        prop_assert!(d.mass_defect.abs() <= 1e-9);
        let total: f64 = d.curves().map(|c| c.weight * c.length(&g)).sum();
        prop_assert!((total - f.mass(&g)).abs() <= 1e-9);
    }

    #[test]
    fn arbitrary_flows_reassemble(seed in any::<u64>(), n in 3usize..20) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let w = (0..g.edges().len()).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-2.0..2.0) }).collect();
        let f = EdgeFlow::new(&g, w).unwrap();
        let d = decompose_flow(&g, &f).unwrap();
        let back = d.reassemble(&g);
        for (a, b) in back.iter().zip(&f.weights) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        prop_assert!(d.mass_defect >= -1e-9);
        prop_assert!(d.curves().all(|c| c.weight > 0.0));
        prop_assert!(d.cycles.iter().all(|c| c.vertices.first() == c.vertices.last()));
        let forms = TestForm::panel(&mut rng, 20, -0.1, 1.1);
        let chain = f.to_chain(&g).unwrap().embed(&g, NormKind::L2).unwrap();
        for form in &forms {
            let direct = chain.evaluate(form);
            let via = d.evaluate(&g, form, NormKind::L2).unwrap();
            prop_assert!((direct - via).abs() <= 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn fragment_mass_identity(seed in any::<u64>(), n in 3usize..16) {
        let mut rng = SeedTree::new(seed).rng();
        let g = fixtures::random_graph(&mut rng, n).unwrap();
        let f = fixtures::random_acyclic_flow(&mut rng, &g, 5).unwrap();
        let d = decompose_flow(&g, &f).unwrap();
        let set = random_set(&mut rng);
        let rep = fragment_representation(&d, &g, &f, &set, NormKind::L2).unwrap();
        prop_assert!(rep.mass_identity_residual <= 1e-9);
        prop_assert!(rep.restricted_mass <= f.mass(&g) + 1e-9);
        for (row, c) in rep.rows.iter().zip(d.curves()) {
            prop_assert!(row.fragment_mass <= row.weight * row.length + 1e-9);
            prop_assert_eq!(row.weight, c.weight);
        }
        let everything = fragment_representation(&d, &g, &f, &ClosedSet::everything(), NormKind::L2).unwrap();
        prop_assert!((everything.fragment_mass - f.mass(&g)).abs() <= 1e-9);
    }
}
