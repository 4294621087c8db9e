use current1d::approximation::{approximate, approximate_signed, cluster, truncate, CurveEntry, CurveMeasure};
use current1d::currents::{PlaneChain, Polyline};
use current1d::fixtures;
use current1d::flatnorm::{flat_norm, CubicalComplex};
use current1d::geometry::{NormKind, Point};
use current1d::rng::SeedTree;
use proptest::prelude::*;
use rand::Rng;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn seg(y: f64) -> Polyline {
    Polyline::segment(p(0.0, y), p(1.0, y))
}

fn measure(curves: &[(f64, Polyline)]) -> CurveMeasure {
    CurveMeasure::new(curves.iter().map(|(w, g)| CurveEntry { w: *w, polyline: g.clone() }).collect(), NormKind::L2).unwrap()
}

#[test]
fn rejects_bad_input() {
    assert!(CurveMeasure::new(vec![CurveEntry { w: 0.0, polyline: seg(0.0) }], NormKind::L2).is_err());
    assert!(CurveMeasure::new(vec![CurveEntry { w: f64::NAN, polyline: seg(0.0) }], NormKind::L2).is_err());
    let eta = measure(&[(1.0, seg(0.0))]);
    assert!(approximate(&eta, 0.0, 0.5).is_err());
    assert!(approximate(&eta, 0.1, 0.0).is_err());
    assert!(cluster(&eta, -1.0).is_err());
    assert!(truncate(&eta, f64::NAN).is_err());
}

#[test]
fn parallel_segments_against_the_lattice() {
    let eta = measure(&[(1.0, seg(0.0)), (1.0, seg(0.05))]);
    let ap = approximate(&eta, 0.1, 0.5).unwrap();
    assert!((ap.cert.flat_bound - 0.4).abs() < 1e-12);
    let n = eta.as_chain();
    let cx = CubicalComplex::covering(&[&n, &ap.p], 0.05, 2).unwrap();
    let lp = flat_norm(&cx.snap(&n).unwrap().minus(&cx.snap(&ap.p).unwrap()), &cx).unwrap();
    // strip of area 0.05 plus two ends of length 0.05
    assert!((lp.value - 0.15).abs() < 1e-7);
    assert!(lp.value <= ap.cert.flat_bound);
}

#[test]
fn semicircle_bound_shrinks_with_the_mesh() {
    let arc = Polyline::new(
        (0..=64)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 64.0;
                p(th.cos(), th.sin())
            })
            .collect(),
    )
    .unwrap();
    let eta = measure(&[(1.0, arc.clone())]);
    let mut prev = f64::INFINITY;
    for k in 1..7 {
        let ap = approximate(&eta, 0.1, 0.5f64.powi(k)).unwrap();
        assert!(ap.cert.flat_bound < prev, "mesh 2^-{k}");
        assert_eq!(ap.cert.clustering_term, 0.0);
        assert!(ap.p.mass() <= arc.length(NormKind::L2) + 1e-12);
        prev = ap.cert.flat_bound;
    }
}

#[test]
fn reports_are_deterministic() {
    let mut rng = SeedTree::new(11).rng();
    let eta = fixtures::random_curve_measure(&mut rng, 60, 4.0, NormKind::L2).unwrap();
    let a = approximate(&eta, 0.1, 0.125).unwrap();
    let b = approximate(&eta, 0.1, 0.125).unwrap();
    assert_eq!(current1d::io::to_json(&a).unwrap(), current1d::io::to_json(&b).unwrap());
}

#[test]
fn halving_eps_halves_the_clustering_term_on_translates() {
    let base = Polyline::new(vec![p(0.0, 0.0), p(0.4, 0.3), p(0.9, 0.1)]).unwrap();
    for k in [20usize, 24] {
        for q in 2..=4 {
            let eps = 0.1;
            let fam = fixtures::translate_family(&base, p(0.0, 1.0), eps / (k as f64 - 0.5), k * q, 1.0 / (k * q) as f64, NormKind::L2).unwrap();
            let coarse = approximate(&fam, eps, 0.25).unwrap().cert.clustering_term;
            let fine = approximate(&fam, eps / 2.0, 0.25).unwrap().cert.clustering_term;
            assert!((fine / coarse - 0.5).abs() <= 0.1, "k = {k}, q = {q}: {}", fine / coarse);
        }
    }
}

#[test]
fn halving_eps_can_increase_the_clustering_term() {
    // at ε the light pair merges; at ε/2 the middle curve joins the heavy one
    let eps = 0.1;
    let eta = measure(&[(1.0, seg(0.0)), (1.0, seg(0.6 * eps)), (10.0, seg(eps))]);
    let coarse = approximate(&eta, eps, 1.0).unwrap();
    let fine = approximate(&eta, eps / 2.0, 1.0).unwrap();
    assert_eq!(coarse.cert.clusters.len(), 2);
    assert_eq!(fine.cert.clusters.len(), 2);
    assert!(fine.cert.clustering_term > coarse.cert.clustering_term);
}

#[test]
fn signed_measures() {
    let entries = vec![(1.0, seg(0.0)), (-1.0, seg(0.05)), (0.5, seg(0.1))];
    let (pc, bound, mass) = approximate_signed(&entries, NormKind::L2, 0.06, 1.0).unwrap();
    assert!((mass - 2.5).abs() < 1e-12);
    assert!(pc.mass() <= mass + 1e-12);
    let mut n = PlaneChain::zero();
    for (w, g) in &entries {
        n = n.plus(&PlaneChain::from_polyline(g, *w, NormKind::L2));
    }
    let cx = CubicalComplex::covering(&[&n, &pc], 0.05, 2).unwrap();
    let lp = flat_norm(&cx.snap(&n).unwrap().minus(&cx.snap(&pc).unwrap()), &cx).unwrap();
    assert!(lp.value <= bound + 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn certificate_structure(seed in any::<u64>(), eps in 0.02f64..0.5, cells in 1usize..16) {
        let mut rng = SeedTree::new(seed).rng();
        let eta = fixtures::random_curve_measure(&mut rng, 40, 4.0, NormKind::L2).unwrap();
        let ap = approximate(&eta, eps, 1.0 / cells as f64).unwrap();
        let c = &ap.cert;
        prop_assert_eq!(c.flat_bound, c.clustering_term + c.interpolation_term);
        prop_assert!(c.mass_p <= c.mass_n + 1e-9);
        prop_assert!((c.mass_n - eta.induced_mass()).abs() <= 1e-12);
        let mut seen = vec![false; eta.len()];
        let mut weight = 0.0;
        for cl in &c.clusters {
            prop_assert!(cl.diameter < 2.0 * eps);
            prop_assert!(cl.members.contains(&cl.representative));
            let rep_len = eta.entries[cl.representative].polyline.length(NormKind::L2);
            for &m in &cl.members {
                prop_assert!(!seen[m]);
                seen[m] = true;
                prop_assert!(rep_len <= eta.entries[m].polyline.length(NormKind::L2));
            }
            weight += cl.weight;
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert!((weight - eta.total_weight()).abs() <= 1e-9);
    }

    #[test]
    fn lattice_measures_are_certified(seed in any::<u64>(), curves in 1usize..6) {
        let mut rng = SeedTree::new(seed).rng();
        let h = 0.25;
        let grid = fixtures::grid_curve_measure(&mut rng, curves, 4, h).unwrap();
        let eps = rng.random_range(0.1..0.6);
        let ap = approximate(&grid, eps, 0.25).unwrap();
        let n = grid.as_chain();
        let cx = CubicalComplex::covering(&[&n, &ap.p], h, 2).unwrap();
        let lp = flat_norm(&cx.snap(&n).unwrap().minus(&cx.snap(&ap.p).unwrap()), &cx).unwrap();
        prop_assert!(lp.value <= ap.cert.flat_bound + 1e-6);
    }

    #[test]
    fn truncation_accounts_for_dropped_mass(seed in any::<u64>(), cap in 0.1f64..3.0) {
        let mut rng = SeedTree::new(seed).rng();
        let eta = fixtures::random_curve_measure(&mut rng, 30, 4.0, NormKind::L2).unwrap();
        let t = truncate(&eta, cap).unwrap();
        prop_assert!((t.measure.induced_mass() + t.mass_error - eta.induced_mass()).abs() <= 1e-9);
        prop_assert!(t.measure.length_bound() <= cap);
    }
}
