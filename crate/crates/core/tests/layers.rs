use proptest::prelude::*;
use stochnum::channel::attenuation_ltf;
use stochnum::layers::{
    link_weight, power_cap_bound, power_optimal_generic, power_optimal_quadratic, routing_optimal, schedule_max_weight,
    MaxWeightSolver, PowerCost, PowerPrices,
};
use stochnum::network::{enumerate_maximal_independent_sets, ConflictGraph};

const B: f64 = 1e6;
const N0: f64 = 0.1;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_power_matches_root_finder(
        x in 40.0..100.0f64,
        ell in 0.0..20.0f64,
        nu in 0.0..5.0f64,
        v in 0.01..10.0f64,
        p_max in 0.5..5.0f64,
    ) {
        let closed = power_optimal_quadratic(x, ell, nu, v, B, N0, p_max);
        let generic = power_optimal_generic(PowerCost::Quadratic { v }, x, ell, nu, B, N0, p_max);
        prop_assert!((closed - generic).abs() <= 1e-9, "{} vs {}", closed, generic);
        prop_assert!((0.0..=p_max).contains(&closed));
    }

    #[test]
    fn power_never_exceeds_the_cap(
        x in 0.0..120.0f64,
        ell in 0.0..20.0f64,
        nu in 0.0..5.0f64,
        v in 0.01..10.0f64,
    ) {
        let p = power_optimal_quadratic(x, ell, nu, v, B, N0, f64::INFINITY);
        let cap = power_cap_bound(ell, nu, v, B);
        prop_assert!(p <= cap * (1.0 + 1e-12) + 1e-15, "{} > {}", p, cap);
    }

    #[test]
    fn power_is_nonincreasing_in_loss(
        x in 40.0..100.0f64,
        dx in 0.0..20.0f64,
        ell in 0.0..20.0f64,
        nu in 0.0..5.0f64,
        v in 0.01..10.0f64,
    ) {
        let a = power_optimal_quadratic(x, ell, nu, v, B, N0, 3.0);
        let b = power_optimal_quadratic(x + dx, ell, nu, v, B, N0, 3.0);
        prop_assert!(b <= a + 1e-12, "P({}) = {} < P({}) = {}", x, a, x + dx, b);
    }

    #[test]
    fn optimal_power_beats_a_grid(
        x in 50.0..90.0f64,
        ell in 0.0..5.0f64,
        nu in 0.0..2.0f64,
        v in 0.05..5.0f64,
    ) {
        let prices = PowerPrices { ell, nu };
        let cost = PowerCost::Quadratic { v };
        let gain = attenuation_ltf(x);
        let p = power_optimal_quadratic(x, ell, nu, v, B, N0, 3.0);
        let best = link_weight(cost, gain, p, prices, B, N0);
        for k in 0..=300 {
            let q = 3.0 * k as f64 / 300.0;
            prop_assert!(link_weight(cost, gain, q, prices, B, N0) <= best + 1e-9);
        }
    }

    #[test]
    fn routing_follows_the_price_sign(
        mi in 0.0..10.0f64,
        mj in 0.0..10.0f64,
        ell in 0.0..10.0f64,
        r_max in 0.1..10.0f64,
    ) {
        let r = routing_optimal(mi, mj, ell, r_max);
        let w = mi - mj - ell;
        if w > 0.0 {
            prop_assert_eq!(r, r_max);
        } else {
            prop_assert_eq!(r, 0.0);
        }
    }
}

fn random_graph(links: usize, edges: &[(usize, usize)]) -> ConflictGraph {
    let pairs: Vec<(usize, usize)> = edges.iter().filter(|(a, b)| a < b && *b < links).copied().collect();
    ConflictGraph::from_pairs(links, &pairs)
}

/// Maximum weight over every independent subset, by enumeration.
fn brute_force_best(g: &ConflictGraph, w: &[f64]) -> f64 {
    let n = g.len();
    let mut best = 0.0f64;
    for mask in 0u32..1 << n {
        let set: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
        if g.is_independent(&set) {
            best = best.max(set.iter().map(|&e| w[e]).sum());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scan_and_branch_and_bound_agree_with_brute_force(
        links in 1usize..=12,
        edges in prop::collection::vec((0usize..12, 0usize..12), 0..40),
        weights in prop::collection::vec(-1.0..3.0f64, 12),
    ) {
        let g = random_graph(links, &edges);
        let w = &weights[..links];
        let exact = brute_force_best(&g, w);
        let family = enumerate_maximal_independent_sets(&g, 1 << 12).unwrap();
        let k = schedule_max_weight(w, &family).unwrap();
        let scan: f64 = family.set(k).iter().map(|&e| w[e].max(0.0)).sum();
        let solver = MaxWeightSolver::new(&g).unwrap();
        let bb = solver.solve(w, &mut Vec::new());
        prop_assert!((scan - exact).abs() < 1e-12, "scan {} exact {}", scan, exact);
        prop_assert!((bb.value - exact).abs() < 1e-12, "b&b {} exact {}", bb.value, exact);
        let chosen: Vec<usize> = (0..links).filter(|&e| bb.is_active(e)).collect();
        prop_assert!(g.is_independent(&chosen));
    }
}
