use std::collections::VecDeque;

use serde::Serialize;

use super::bank::ChannelBank;
use super::estimate::{deterministic_controls, path_sums, reduce, ExpectationEstimates};
use super::multipliers::Multipliers;
use super::spec::{Mode, ProblemSpec};
use crate::error::Result;
use crate::layers::RATE_FLOOR;
use crate::network::{IndependentSetFamily, Network};

/// A feasible primal point built without the dual: shortest-hop routes,
/// fixed transmit power, equal time sharing of the independent sets, and
/// max-min fair rates on the resulting capacities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalCandidate {
    pub rates: Vec<f64>,
    /// `sum_f ∫U dt - E ∫ sum pi J dt`
    pub objective: f64,
    pub routes: Vec<Vec<usize>>,
}

/// Link ids of a shortest-hop route; ties go to lower link ids.
pub fn shortest_route(net: &Network, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev: Vec<Option<usize>> = vec![None; net.num_nodes()];
    let mut seen = vec![false; net.num_nodes()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(i) = queue.pop_front() {
        if i == to {
            let mut route = Vec::new();
            let mut at = to;
            while let Some(e) = prev[at] {
                route.push(e);
                at = net.link(e).from;
            }
            route.reverse();
            return Some(route);
        }
        for &e in net.out_links(i) {
            let j = net.link(e).to;
            if !seen[j] {
                seen[j] = true;
                prev[j] = Some(e);
                queue.push_back(j);
            }
        }
    }
    None
}

/// Progressive filling: raise all unfrozen rates together until a resource
/// saturates. `uses[f]` lists resource ids of flow `f`.
pub fn max_min_fair(capacity: &[f64], uses: &[Vec<usize>], cap_rate: f64) -> Vec<f64> {
    let mut rates = vec![0.0; uses.len()];
    let mut frozen = vec![false; uses.len()];
    let mut left = capacity.to_vec();
    loop {
        let active: Vec<usize> = (0..uses.len()).filter(|&f| !frozen[f]).collect();
        if active.is_empty() {
            break;
        }
        let mut count = vec![0usize; capacity.len()];
        for &f in &active {
            for &r in &uses[f] {
                count[r] += 1;
            }
        }
        let mut inc = active.iter().map(|&f| cap_rate - rates[f]).fold(f64::INFINITY, f64::min);
        for (r, &c) in count.iter().enumerate() {
            if c > 0 {
                inc = inc.min(left[r].max(0.0) / c as f64);
            }
        }
        for &f in &active {
            rates[f] += inc;
            for &r in &uses[f] {
                left[r] -= inc;
            }
        }
        let mut any = false;
        for &f in &active {
            let saturated = rates[f] >= cap_rate * (1.0 - 1e-12)
                || uses[f].iter().any(|&r| left[r] <= 1e-12 * capacity[r].abs().max(1e-300));
            if saturated {
                frozen[f] = true;
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    rates
}

/// Power and per-link shares of the candidate policy with every node inside
/// its budget. Orthogonal access scales the shares of an over-budget node;
/// the shared medium lowers the common power instead.
fn candidate_policy(spec: &ProblemSpec) -> (f64, Vec<f64>) {
    let net = &spec.network;
    let p = &net.params;
    let horizon = spec.grid.horizon();
    let mut power = spec.p_fixed.clamp(p.p_min, p.p_max);
    match spec.mode {
        Mode::P2 => {
            let mut shares = if spec.scheduling {
                spec.family.as_ref().map(IndependentSetFamily::time_shares).expect("validated")
            } else {
                spec.time_shares.clone()
            };
            for i in 0..net.num_nodes() {
                let used: f64 = net.out_links(i).iter().map(|&e| shares[e] * power * horizon).sum();
                if used > p.node_budget {
                    let scale = p.node_budget / used;
                    for &e in net.out_links(i) {
                        shares[e] *= scale;
                    }
                }
            }
            (power, shares)
        }
        Mode::P1 => {
            for i in 0..net.num_nodes() {
                let deg = net.out_links(i).len();
                if deg > 0 {
                    power = power.min(p.node_budget / (deg as f64 * horizon));
                }
            }
            (power, vec![1.0; net.num_links()])
        }
    }
}

/// Candidate on the spec's own sample paths; capacities are taken three
/// standard errors below their estimates.
pub fn primal_candidate(spec: &ProblemSpec, bank: &ChannelBank) -> PrimalCandidate {
    let net = &spec.network;
    let (power, shares) = candidate_policy(spec);
    let mut fixed = spec.clone();
    fixed.power_control = false;
    fixed.scheduling = false;
    fixed.p_fixed = power;
    fixed.time_shares = shares.clone();
    let zero = Multipliers::filled(&spec.flows.destinations, net.num_nodes(), net.num_links(), 0.0, 0.0, 0.0);
    let est: ExpectationEstimates = reduce(&path_sums(&fixed, bank, &zero));
    let horizon = spec.grid.horizon();
    let links = net.num_links();
    let dests = spec.flows.destinations.len();
    // resources: link capacities, then per-(link, destination) routing caps
    let mut capacity: Vec<f64> = (0..links)
        .map(|e| (est.capacity[e] - 3.0 * est.capacity_se[e]).max(0.0) / horizon)
        .collect();
    capacity.extend(std::iter::repeat_n(net.params.r_max, links * dests));
    let mut routes = Vec::with_capacity(spec.flows.len());
    let mut uses = Vec::with_capacity(spec.flows.len());
    for f in &spec.flows.flows {
        let route = shortest_route(net, f.source, f.destination).unwrap_or_default();
        let d = spec.flows.destination_index(f.destination).expect("listed");
        let mut u: Vec<usize> = route.clone();
        u.extend(route.iter().map(|&e| links + d * links + e));
        uses.push(u);
        routes.push(route);
    }
    let rates = max_min_fair(&capacity, &uses, net.params.lambda_max);
    let grid = &spec.grid;
    let dt = grid.dt();
    let mut objective = 0.0;
    for (u, &l) in spec.utilities.iter().zip(&rates) {
        let l = l.max(RATE_FLOOR.min(net.params.lambda_max));
        if u.is_time_varying() {
            objective += (0..grid.n()).map(|b| u.value(l, grid.node(b)) * dt).sum::<f64>();
        } else {
            objective += u.value(l, grid.s()) * horizon;
        }
    }
    let cost: f64 = shares.iter().map(|z| z * spec.cost.value(power)).sum::<f64>() * horizon;
    objective -= cost;
    PrimalCandidate {
        rates,
        objective,
        routes,
    }
}

/// Controls recovered from a dual run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalRecovery {
    /// Running average of the routing decisions, `[destination][link]`.
    pub routing: Vec<Vec<f64>>,
    /// Flow rates at the final multipliers (first grid node).
    pub rates: Vec<f64>,
    /// Rate of each flow at every left grid node.
    pub rate_profiles: Vec<Vec<f64>>,
    /// Multipliers defining the power and scheduling policy.
    pub multipliers: Multipliers,
}

pub fn recover_primal_from(spec: &ProblemSpec, routing_sum: &[Vec<f64>], iterations: usize, m: &Multipliers) -> PrimalRecovery {
    let n = iterations.max(1) as f64;
    let routing = routing_sum.iter().map(|row| row.iter().map(|r| r / n).collect()).collect();
    let controls = deterministic_controls(spec, m);
    let grid = &spec.grid;
    let lambda_max = spec.network.params.lambda_max;
    let rate_profiles = spec
        .flows
        .flows
        .iter()
        .zip(&spec.utilities)
        .map(|(f, u)| {
            let d = spec.flows.destination_index(f.destination).expect("listed");
            let mu = m.mu[d][f.source];
            (0..grid.n()).map(|b| super::estimate::flow_rate(u, mu, grid.node(b), lambda_max)).collect()
        })
        .collect();
    PrimalRecovery {
        routing,
        rates: controls.lambda,
        rate_profiles,
        multipliers: m.clone(),
    }
}

/// Constraint check of recovered controls on freshly sampled paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// Largest `sum_d ∫ r - E ∫ pi C` over links, and the standard error of
    /// that link's capacity estimate.
    pub capacity_violation: f64,
    pub capacity_violation_se: f64,
    /// Largest `E ∫ sum pi P - P_max` over nodes and its standard error.
    pub power_violation: f64,
    pub power_violation_se: f64,
    /// Largest `∫ lambda + in - out` over node/destination pairs.
    pub conservation_violation: f64,
    /// Capacity and power constraints hold within three standard errors.
    pub within_noise: bool,
}

pub fn recheck_feasibility(spec: &ProblemSpec, recovery: &PrimalRecovery, stream: u64) -> Result<FeasibilityReport> {
    let bank = ChannelBank::sample(spec, stream)?;
    let est = reduce(&path_sums(spec, &bank, &recovery.multipliers));
    let net = &spec.network;
    let horizon = spec.grid.horizon();
    let grid = &spec.grid;
    let mut worst = (f64::NEG_INFINITY, 0.0);
    let mut ok = true;
    for e in 0..net.num_links() {
        let load: f64 = recovery.routing.iter().map(|row| row[e] * horizon).sum();
        let v = load - est.capacity[e];
        if v > 3.0 * est.capacity_se[e] + 1e-9 * est.capacity[e].abs() {
            ok = false;
        }
        if v > worst.0 {
            worst = (v, est.capacity_se[e]);
        }
    }
    let mut pworst = (f64::NEG_INFINITY, 0.0);
    for i in 0..net.num_nodes() {
        let (mut used, mut var) = (0.0, 0.0);
        for &e in net.out_links(i) {
            used += est.power[e];
            var += est.power_se[e] * est.power_se[e];
        }
        let v = used - net.params.node_budget;
        if v > 3.0 * var.sqrt() + 1e-12 {
            ok = false;
        }
        if v > pworst.0 {
            pworst = (v, var.sqrt());
        }
    }
    let mut cworst = f64::NEG_INFINITY;
    for (k, &d) in spec.flows.destinations.iter().enumerate() {
        let mut g = vec![0.0; net.num_nodes()];
        for (f, profile) in spec.flows.flows.iter().zip(&recovery.rate_profiles) {
            if f.destination == d {
                g[f.source] += profile.iter().sum::<f64>() * grid.dt();
            }
        }
        for (e, l) in net.links().iter().enumerate() {
            let flow = recovery.routing[k][e] * horizon;
            g[l.from] -= flow;
            g[l.to] += flow;
        }
        for (i, v) in g.iter().enumerate() {
            if i != d {
                cworst = cworst.max(*v);
            }
        }
    }
    Ok(FeasibilityReport {
        capacity_violation: worst.0,
        capacity_violation_se: worst.1,
        power_violation: pworst.0,
        power_violation_se: pworst.1,
        conservation_violation: cworst,
        within_noise: ok,
    })
}
