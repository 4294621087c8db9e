use current1d::rng::SeedTree;
use current1d::solvers::{min_cost_flow, simplex_lp, FlowNetwork, LinearProgram};
use current1d::suite::transportation_lp;
use current1d::{fixtures, Error};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn single_arc() {
    let mut net = FlowNetwork::new(2);
    net.add_arc(0, 1, 2.5, f64::INFINITY);
    net.supply = vec![1.0, -1.0];
    assert_eq!(min_cost_flow(&net).unwrap().cost, 2.5);
}

#[test]
fn line_with_two_sources() {
    // nodes 0, 1, 3 on a line; node 2 is unused
    let mut net = FlowNetwork::new(4);
    net.add_edge(0, 1, 1.0);
    net.add_edge(1, 3, 2.0);
    net.supply = vec![1.0, -2.0, 0.0, 1.0];
    let sol = min_cost_flow(&net).unwrap();
    assert!((sol.cost - 3.0).abs() < 1e-12);
    let lp = simplex_lp(&transportation_lp(&net)).unwrap();
    assert!((lp.optimum - 3.0).abs() < 1e-9);
}

#[test]
fn zero_divergence() {
    let mut net = FlowNetwork::new(3);
    net.add_edge(0, 1, 1.0);
    net.add_edge(1, 2, 1.0);
    let sol = min_cost_flow(&net).unwrap();
    assert_eq!(sol.cost, 0.0);
    assert!(sol.flow.iter().all(|&f| f == 0.0));
}

#[test]
fn unroutable_supply_is_infeasible() {
    let mut net = FlowNetwork::new(3);
    net.add_arc(0, 1, 1.0, f64::INFINITY);
    net.supply = vec![1.0, 0.0, -1.0];
    assert!(matches!(min_cost_flow(&net), Err(Error::Infeasible(_))));
    let mut cap = FlowNetwork::new(2);
    cap.add_arc(0, 1, 1.0, 0.5);
    cap.supply = vec![1.0, -1.0];
    assert!(matches!(min_cost_flow(&cap), Err(Error::Infeasible(_))));
}

#[test]
fn trivial_lp() {
    let lp = LinearProgram::from_dense(vec![1.0], &[vec![1.0]], vec![1.0]).unwrap();
    assert_eq!(simplex_lp(&lp).unwrap().optimum, 1.0);
}

#[test]
fn redundant_row_does_not_change_the_optimum() {
    let a = vec![vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]];
    let b = vec![4.0, 1.0];
    let c = vec![1.0, 2.0, 3.0];
    let base = simplex_lp(&LinearProgram::from_dense(c.clone(), &a, b.clone()).unwrap()).unwrap();
    let mut a2 = a.clone();
    a2.push(vec![2.0, 0.0, 1.0]);
    let redundant = simplex_lp(&LinearProgram::from_dense(c, &a2, vec![4.0, 1.0, 5.0]).unwrap()).unwrap();
    assert!((base.optimum - redundant.optimum).abs() < 1e-9);
    assert_eq!(redundant.redundant_rows.len(), 1);
}

#[test]
fn infeasible_and_unbounded_programs() {
    let infeasible = LinearProgram::from_dense(vec![1.0], &[vec![1.0]], vec![-1.0]).unwrap();
    assert!(matches!(simplex_lp(&infeasible), Err(Error::Infeasible(_))));
    let unbounded = LinearProgram::from_dense(vec![-1.0, 0.0], &[vec![1.0, -1.0]], vec![0.0]).unwrap();
    assert!(matches!(simplex_lp(&unbounded), Err(Error::Unbounded)));
}

fn random_network<R: Rng>(rng: &mut R) -> FlowNetwork {
    let n = rng.random_range(2..=20);
    let mut net = FlowNetwork::new(n);
    // a spanning path keeps everything routable
    for v in 1..n {
        net.add_edge(v - 1, v, rng.random_range(0.0..5.0));
    }
    for _ in 0..rng.random_range(0..2 * n) {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            net.add_arc(u, v, rng.random_range(0.0..5.0), f64::INFINITY);
        }
    }
    let mut total = 0.0;
    for v in 0..n - 1 {
        let s = rng.random_range(-3.0..3.0);
        net.supply[v] = s;
        total += s;
    }
    net.supply[n - 1] = -total;
    net
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flow_matches_simplex(seed in any::<u64>()) {
        let mut rng = SeedTree::new(seed).rng();
        let net = random_network(&mut rng);
        let sol = min_cost_flow(&net).unwrap();
        let lp = transportation_lp(&net);
        let lps = simplex_lp(&lp).unwrap();
        prop_assert!((sol.cost - lps.optimum).abs() <= 1e-7);
        prop_assert!(lps.duality_gap(&lp) <= 1e-7 * (1.0 + lps.optimum.abs()));
        prop_assert!(lp.residual(&lps.x) <= 1e-8);
        let cost: f64 = net.arcs.iter().zip(&sol.flow).map(|(a, f)| a.cost * f).sum();
        prop_assert!((cost - sol.cost).abs() <= 1e-9 * (1.0 + cost));
        for (a, &f) in net.arcs.iter().zip(&sol.flow) {
            prop_assert!(sol.potential[a.v] - sol.potential[a.u] <= a.cost + 1e-9);
            if f > 1e-9 {
                prop_assert!(sol.reduced_cost(a) <= 1e-9);
            }
        }
    }

    #[test]
    fn transportation_instances_agree(seed in any::<u64>()) {
        let mut rng = SeedTree::new(seed).rng();
        let (m, n) = (rng.random_range(1..=10), rng.random_range(1..=10));
        let net = fixtures::random_transportation(&mut rng, m, n);
        let a = min_cost_flow(&net).unwrap().cost;
        let b = simplex_lp(&transportation_lp(&net)).unwrap().optimum;
        prop_assert!((a - b).abs() <= 1e-7);
    }
}
