use current1d::currents::{restrict_chain, ClosedSet, PlaneChain};
use current1d::fixtures;
use current1d::geometry::{Line, NormKind, Point};
use current1d::rng::SeedTree;
use current1d::structure::{is_admissible, normalize, rectifiable_filling, rescale_interior, translate_singular, AtomicMeasure, ConvexBox};
use current1d::transport::ae_norm_plane;
use proptest::prelude::*;
use rand::Rng;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Disjoint weighted intervals along `h`, with coordinates on a coarse lattice so endpoints stay exact.
fn line_chain<R: Rng>(rng: &mut R, h: &Line, norm: NormKind) -> PlaneChain {
    let k = rng.random_range(1..=5);
    let mut cuts: Vec<i32> = (0..2 * k).map(|_| rng.random_range(-40..40)).collect();
    cuts.sort();
    cuts.dedup();
    let at = |s: i32| h.anchor() + (s as f64 / 8.0) * h.direction();
    let mut c = PlaneChain::zero();
    for w in cuts.chunks_exact(2) {
        let weight = [1.0, -1.0, 0.5, 2.0][rng.random_range(0..4)];
        c.push(PlaneChain::segment(at(w[0]), at(w[1]), weight, norm).pieces[0]);
    }
    c
}

#[test]
fn fat_cantor_stage_two() {
    let t = fixtures::fat_cantor_chain(2, NormKind::L2);
    assert_eq!(t.mass(), 0.625);
    let r = normalize(&t, &Line::x_axis(), 0.1, NormKind::L2).unwrap();
    assert!(r.boundary_residual <= 1e-9);
    assert!(r.n.mass() <= 2.1 * 0.625 + 1e-9);
    assert!(r.restrict_mass_diff <= 1e-9);
    assert!(r.restrict_residual <= 1e-9);
    assert!(is_admissible(&r.r, &AtomicMeasure::default(), &Line::x_axis()));
}

#[test]
fn zero_chain_normalizes_to_zero() {
    let r = normalize(&PlaneChain::zero(), &Line::x_axis(), 0.1, NormKind::L2).unwrap();
    assert!(r.n.is_empty());
    assert_eq!(r.mass_ratio, 0.0);
}

#[test]
fn rescale_rejects_bad_input() {
    let c = ConvexBox::new(Point::ORIGIN, p(1.0, 1.0)).unwrap();
    let seg = PlaneChain::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
    assert!(rescale_interior(&seg, &c, 0.0, NormKind::L2).is_err());
    assert!(ConvexBox::new(Point::ORIGIN, p(0.0, 1.0)).is_err());
    assert!(translate_singular(&seg, &AtomicMeasure::default(), &Line::x_axis(), 0.0, NormKind::L2).is_err());
    assert!(AtomicMeasure::new(vec![(p(0.0, 0.0), -1.0)]).is_err());
}

#[test]
fn filling_rejects_atoms_on_the_boundary() {
    let seg = PlaneChain::segment(p(0.0, 1.0), p(1.0, 1.0), 1.0, NormKind::L2);
    let mu = AtomicMeasure::new(vec![(p(1.0, 1.0), 1.0)]).unwrap();
    assert!(rectifiable_filling(&seg, 0.1, &mu, &Line::x_axis(), None, NormKind::L2).is_err());
}

#[test]
fn filling_stays_in_its_box() {
    let c = ConvexBox::new(Point::ORIGIN, p(1.0, 1.0)).unwrap();
    let seg = PlaneChain::segment(p(-1.0, 0.0), p(1.0, 0.0), 1.0, NormKind::L2);
    let f = rectifiable_filling(&seg, 0.1, &AtomicMeasure::default(), &Line::x_axis(), Some(&c), NormKind::L2).unwrap();
    assert!(f.boundary_residual <= 1e-9);
    assert!(c.chain_margin(&f.r) >= -1e-9);
    assert!(f.r.mass() <= 2.0 * 1.1 + 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn normalization_on_random_lines(seed in any::<u64>(), k in 0usize..3, eps in 0.05f64..0.5) {
        let norm = [NormKind::L2, NormKind::L1, NormKind::Linf][k];
        let mut rng = SeedTree::new(seed).rng();
        let h = if rng.random_bool(0.5) {
            Line::x_axis()
        } else {
            let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
            Line::new(th.cos(), th.sin(), rng.random_range(-1.0..1.0)).unwrap()
        };
        let t = line_chain(&mut rng, &h, norm);
        let r = normalize(&t, &h, eps, norm).unwrap();
        prop_assert!(r.boundary_residual <= 1e-9);
        prop_assert!(ae_norm_plane(&r.n.boundary(), norm).unwrap().value <= 1e-9);
        prop_assert!(r.n.mass() <= (2.0 + eps) * t.mass() + 1e-9);
        prop_assert!(r.restrict_mass_diff <= 1e-6);
        let back = restrict_chain(&r.n, &ClosedSet::line(h), norm).unwrap();
        prop_assert!((back.mass() - t.mass()).abs() <= 1e-6);
        prop_assert!(back.to_chain().minus(&t).canonical().mass() <= 1e-6);
        prop_assert!(is_admissible(&r.r, &AtomicMeasure::default(), &h));
    }

    #[test]
    fn rescaling_moves_chains_inside(seed in any::<u64>(), eps in 0.001f64..1.0) {
        let mut rng = SeedTree::new(seed).rng();
        let start = p(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let pieces = rng.random_range(1..5);
        let g = fixtures::random_polyline(&mut rng, start, pieces, 0.4);
        let t = PlaneChain::from_polyline(&g, rng.random_range(0.5..2.0), NormKind::L2);
        let c = ConvexBox::around(&t, 0.0).unwrap();
        let r = rescale_interior(&t, &c, eps, NormKind::L2).unwrap();
        prop_assert!(r.eta > 0.0);
        prop_assert!(r.flat_cert <= eps + 1e-12);
        prop_assert!(c.chain_margin(&r.chain) > 0.0);
        prop_assert!(r.chain.mass() <= t.mass() + 1e-12);
        let closed = t.minus(&r.chain).minus(&r.remainder);
        prop_assert!(closed.boundary().total_variation() <= 1e-9);
    }

    #[test]
    fn translation_avoids_atoms_and_the_line(seed in any::<u64>(), t1 in 0.01f64..1.0) {
        let mut rng = SeedTree::new(seed).rng();
        let h = Line::x_axis();
        let t = line_chain(&mut rng, &h, NormKind::L2);
        let atoms = (0..rng.random_range(0..6)).map(|_| (p(rng.random_range(-5.0..5.0), rng.random_range(0.0..0.05)), 1.0)).collect();
        let mu = AtomicMeasure::new(atoms).unwrap();
        let tr = translate_singular(&t, &mu, &h, t1, NormKind::L2).unwrap();
        prop_assert!(tr.t > 0.0 && tr.t <= t1);
        prop_assert!(is_admissible(&tr.chain, &mu, &h));
        prop_assert!(tr.remainder.mass() <= tr.flat_cert + 1e-12);
        let closed = t.minus(&tr.chain).minus(&tr.remainder);
        prop_assert!(closed.boundary().total_variation() <= 1e-9);
    }
}
