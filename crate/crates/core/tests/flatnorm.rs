use current1d::currents::{PlaneChain, Polyline};
use current1d::fixtures;
use current1d::flatnorm::{flat_norm, flat_upper_bound_pair, CubicalComplex, EdgeChain};
use current1d::geometry::{NormKind, Point};
use current1d::rng::SeedTree;
use proptest::prelude::*;
use rand::Rng;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn loop_chain(pts: &[Point]) -> PlaneChain {
    let mut c = PlaneChain::zero();
    for k in 0..pts.len() {
        c = c.plus(&PlaneChain::segment(pts[k], pts[(k + 1) % pts.len()], 1.0, NormKind::L2));
    }
    c
}

fn rect(x0: f64, y0: f64, w: f64, h: f64) -> PlaneChain {
    loop_chain(&[p(x0, y0), p(x0 + w, y0), p(x0 + w, y0 + h), p(x0, y0 + h)])
}

#[test]
fn snap_examples() {
    let cx = CubicalComplex::new(p(0.0, 0.0), 1.0, 3, 3).unwrap();
    let e = cx.snap(&PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2)).unwrap();
    assert_eq!(e.coeffs.iter().filter(|&&c| c != 0.0).count(), 1);
    assert_eq!(cx.mass(&e), 1.0);
    let sq = cx.snap(&rect(1.0, 1.0, 1.0, 1.0)).unwrap();
    assert_eq!(sq.coeffs.iter().filter(|&&c| c != 0.0).count(), 4);
    let there = PlaneChain::segment(p(0.0, 0.0), p(2.0, 0.0), 1.0, NormKind::L2);
    let back = PlaneChain::segment(p(2.0, 0.0), p(0.0, 0.0), 1.0, NormKind::L2);
    assert!(cx.snap(&there.plus(&back)).unwrap().is_zero());
    assert!(cx.snap(&PlaneChain::segment(p(0.0, 0.0), p(1.0, 1.0), 1.0, NormKind::L2)).is_err());
    assert!(cx.snap(&PlaneChain::segment(p(0.5, 0.0), p(1.5, 0.0), 1.0, NormKind::L2)).is_err());
}

#[test]
fn zero_chain_has_zero_norm() {
    let cx = CubicalComplex::new(p(0.0, 0.0), 1.0, 2, 2).unwrap();
    assert_eq!(flat_norm(&EdgeChain::zero(cx.edge_count()), &cx).unwrap().value, 0.0);
}

/// `min Σ|t − ∂s| h + Σ|s| h²` over `s ∈ {−1, 0, 1}` per face.
fn exhaustive(t: &EdgeChain, cx: &CubicalComplex) -> f64 {
    let nf = cx.face_count();
    let mut best = f64::INFINITY;
    let mut s = vec![-1.0; nf];
    loop {
        let r = t.minus(&cx.boundary_of(&s));
        let v = cx.h * r.coeffs.iter().map(|c| c.abs()).sum::<f64>() + cx.h * cx.h * s.iter().map(|c| c.abs()).sum::<f64>();
        best = best.min(v);
        let mut k = 0;
        while k < nf && s[k] == 1.0 {
            s[k] = -1.0;
            k += 1;
        }
        if k == nf {
            return best;
        }
        s[k] += 1.0;
    }
}

#[test]
fn unit_square_matches_exhaustive_search() {
    let cx = CubicalComplex::new(p(0.0, 0.0), 1.0, 3, 3).unwrap();
    let t = cx.snap(&rect(1.0, 1.0, 1.0, 1.0)).unwrap();
    let lp = flat_norm(&t, &cx).unwrap();
    assert!((lp.value - exhaustive(&t, &cx)).abs() < 1e-8);
    assert!((lp.value - 1.0).abs() < 1e-8);
    assert!(lp.decomposition_residual(&t, &cx) < 1e-8);
}

#[test]
fn thin_rectangles() {
    for k in 1..=8 {
        let cx = CubicalComplex::new(p(0.0, 0.0), 1.0, k + 2, 3).unwrap();
        let t = cx.snap(&rect(1.0, 1.0, k as f64, 1.0)).unwrap();
        let want = (2.0 + 2.0 * k as f64).min(k as f64);
        assert!((flat_norm(&t, &cx).unwrap().value - want).abs() < 1e-8, "k = {k}");
    }
}

#[test]
fn small_squares_are_not_worth_filling_at_coarse_scale() {
    // perimeter 4h against area h²: filling wins only when h < 4
    let cx = CubicalComplex::new(p(0.0, 0.0), 5.0, 3, 3).unwrap();
    let t = cx.snap(&rect(5.0, 5.0, 5.0, 5.0)).unwrap();
    assert!((flat_norm(&t, &cx).unwrap().value - 20.0).abs() < 1e-8);
}

#[test]
fn pair_bound_examples() {
    let g = Polyline::new(vec![p(0.0, 0.0), p(0.4, 0.3), p(1.0, 0.0)]).unwrap();
    assert_eq!(flat_upper_bound_pair(&g, &g, NormKind::L2), 0.0);
    let a = Polyline::segment(p(0.0, 0.0), p(1.0, 0.0));
    let b = Polyline::segment(p(0.0, 0.05), p(1.0, 0.05));
    assert!((flat_upper_bound_pair(&a, &b, NormKind::L2) - 0.2).abs() < 1e-12);
}

fn lattice_chain<R: Rng>(rng: &mut R, h: f64) -> PlaneChain {
    let start = p(h * rng.random_range(0..3) as f64, h * rng.random_range(0..3) as f64);
    let (right, up) = (rng.random_range(0..4), rng.random_range(1..4));
    let g = fixtures::staircase(rng, start, right, up, h);
    PlaneChain::from_polyline(&g, rng.random_range(-2..=2) as f64, NormKind::L2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pair_bound_is_sound(seed in any::<u64>()) {
        let mut rng = SeedTree::new(seed).rng();
        let (g0, g1) = fixtures::grid_pair(&mut rng, 0.5);
        let c0 = PlaneChain::from_polyline(&g0, 1.0, NormKind::L2);
        let c1 = PlaneChain::from_polyline(&g1, 1.0, NormKind::L2);
        let cx = CubicalComplex::covering(&[&c0, &c1], 0.5, 2).unwrap();
        let lp = flat_norm(&cx.snap(&c0).unwrap().minus(&cx.snap(&c1).unwrap()), &cx).unwrap();
        prop_assert!(lp.value <= flat_upper_bound_pair(&g0, &g1, NormKind::L2) + 1e-7);
    }

    #[test]
    fn subadditive(seed in any::<u64>()) {
        let mut rng = SeedTree::new(seed).rng();
        let a = lattice_chain(&mut rng, 1.0);
        let b = lattice_chain(&mut rng, 1.0);
        let cx = CubicalComplex::new(p(-1.0, -1.0), 1.0, 8, 8).unwrap();
        let (ta, tb) = (cx.snap(&a).unwrap(), cx.snap(&b).unwrap());
        let fa = flat_norm(&ta, &cx).unwrap();
        let fb = flat_norm(&tb, &cx).unwrap();
        let fab = flat_norm(&ta.plus(&tb), &cx).unwrap();
        prop_assert!(fab.value <= fa.value + fb.value + 1e-7);
        prop_assert!(fab.value <= cx.mass(&ta.plus(&tb)) + 1e-8);
        prop_assert!(fab.decomposition_residual(&ta.plus(&tb), &cx) <= 1e-8);
    }

    #[test]
    fn face_boundaries_cost_at_most_their_area(h in 0.1f64..6.0, i in 0usize..4, j in 0usize..4) {
        let cx = CubicalComplex::new(p(0.0, 0.0), h, 4, 4).unwrap();
        let mut s = vec![0.0; cx.face_count()];
        s[j * 4 + i] = 1.0;
        let t = cx.boundary_of(&s);
        prop_assert!(flat_norm(&t, &cx).unwrap().value <= h * h + 1e-8);
    }

    #[test]
    fn refining_the_mesh_never_increases_the_norm(seed in any::<u64>()) {
        let mut rng = SeedTree::new(seed).rng();
        let c = lattice_chain(&mut rng, 1.0).plus(&lattice_chain(&mut rng, 1.0));
        let coarse = CubicalComplex::new(p(-1.0, -1.0), 1.0, 7, 7).unwrap();
        let fine = CubicalComplex::new(p(-1.0, -1.0), 0.5, 14, 14).unwrap();
        let a = flat_norm(&coarse.snap(&c).unwrap(), &coarse).unwrap().value;
        let b = flat_norm(&fine.snap(&c).unwrap(), &fine).unwrap().value;
        prop_assert!(b <= a + 1e-7);
    }
}
