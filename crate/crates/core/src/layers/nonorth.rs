//! Power allocation when links share the medium: a projected
//! block-coordinate ascent with several starting points. The result is a
//! feasible point, so its objective is a lower bound on the inner maximum.

use rand::Rng;

use super::concave_max::scalar_argmax_with;
use super::power::{power_optimal_generic_on, PowerCost, PowerPrices};
use crate::network::{capacity_nonorthogonal, LinkGains, Network};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicPower {
    pub power: Vec<f64>,
    pub objective: f64,
}

/// `sum_e -J(P_e) + ell_e C_e(P) - nu_e P_e` with SINR capacities.
pub fn nonorthogonal_objective(net: &Network, gains: &LinkGains, prices: &[PowerPrices], cost: PowerCost, p: &[f64]) -> f64 {
    (0..p.len())
        .map(|e| -cost.value(p[e]) + prices[e].ell * capacity_nonorthogonal(net, gains, p, e) - prices[e].nu * p[e])
        .sum()
}

/// `prices[e]` carries the link multiplier and the power multiplier of the
/// transmitting node. `restarts` random starts are added to the all-zero,
/// half and full power patterns.
pub fn power_nonorthogonal_heuristic(
    net: &Network,
    gains: &LinkGains,
    prices: &[PowerPrices],
    cost: PowerCost,
    restarts: usize,
    seed: u64,
) -> HeuristicPower {
    let m = net.num_links();
    let p_max = net.params.p_max;
    // links whose transmission hurts link f
    let mut victims: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (f, terms) in gains.interference.iter().enumerate() {
        for &(k, a) in terms {
            victims[k].push((f, a));
        }
    }
    let mut starts: Vec<Vec<f64>> = [0.0, 0.5 * p_max, p_max].iter().map(|&v| vec![v; m]).collect();
    let mut rng = seeded_rng(seed, 2);
    for _ in 0..restarts {
        starts.push((0..m).map(|_| rng.random_range(0.0..=p_max)).collect());
    }
    let mut best: Option<HeuristicPower> = None;
    for mut p in starts {
        let mut value = nonorthogonal_objective(net, gains, prices, cost, &p);
        for _sweep in 0..100 {
            for e in 0..m {
                p[e] = best_coordinate(net, gains, prices, cost, &victims, &mut p, e);
            }
            let next = nonorthogonal_objective(net, gains, prices, cost, &p);
            let gain = next - value;
            value = next;
            if gain <= 1e-12 * (1.0 + value.abs()) {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.objective) {
            best = Some(HeuristicPower {
                power: p,
                objective: value,
            });
        }
    }
    best.expect("at least three starts")
}

fn best_coordinate(
    net: &Network,
    gains: &LinkGains,
    prices: &[PowerPrices],
    cost: PowerCost,
    victims: &[Vec<(usize, f64)>],
    p: &mut [f64],
    e: usize,
) -> f64 {
    let interference: f64 = gains.interference[e].iter().map(|&(k, a)| a * p[k]).sum();
    let noise = net.params.noise + interference;
    let hurts = victims[e].iter().any(|&(f, _)| prices[f].ell > 0.0 && p[f] > 0.0);
    if !hurts {
        return power_optimal_generic_on(cost, gains.direct[e], prices[e], net.params.bandwidth, noise, 0.0, net.params.p_max);
    }
    let current = p[e];
    let mut local = |x: f64| {
        p[e] = x;
        let own = -cost.value(x) + prices[e].ell * capacity_nonorthogonal(net, gains, p, e) - prices[e].nu * x;
        let cross: f64 = victims[e]
            .iter()
            .map(|&(f, _)| prices[f].ell * capacity_nonorthogonal(net, gains, p, f))
            .sum();
        own + cross
    };
    let before = local(current);
    let x = scalar_argmax_with(&mut local, 0.0, net.params.p_max, 32, 1e-9);
    let after = local(x);
    p[e] = current;
    if after >= before {
        x
    } else {
        current
    }
}
