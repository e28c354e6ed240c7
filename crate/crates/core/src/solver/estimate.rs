use rayon::prelude::*;

use super::bank::ChannelBank;
use super::multipliers::Multipliers;
use super::spec::{Mode, ProblemSpec};
use crate::layers::{
    congestion_optimal_rate, power_nonorthogonal_heuristic, power_optimal, routing_optimal, MaxWeightSolver, PowerPrices,
    Utility, RATE_FLOOR,
};
use crate::network::{capacity_nonorthogonal, capacity_orthogonal, LinkGains};

/// Channel-independent controls at the current multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicControls {
    /// Rate of each flow at the first grid node (the rate for time-invariant
    /// utilities).
    pub lambda: Vec<f64>,
    /// `∫ lambda dt` per flow (left Riemann sum).
    pub lambda_int: Vec<f64>,
    /// `∫ U(lambda, t) dt` per flow.
    pub utility_int: Vec<f64>,
    /// `routing[d][e]`, constant over time.
    pub routing: Vec<Vec<f64>>,
    pub(crate) time_divided: Option<TimeDividedSums>,
}

/// Suffix sums over the grid for `ln(lambda) / t`, whose rate is
/// `1 / (t mu)` clipped at `lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TimeDividedSums {
    nodes: Vec<f64>,
    /// `inv[b] = sum_{j >= b} dt / t_j`
    inv: Vec<f64>,
    /// `log[b] = sum_{j >= b} dt ln(t_j) / t_j`
    log: Vec<f64>,
}

impl TimeDividedSums {
    fn new(grid: &crate::channel::TimeGrid) -> Self {
        let n = grid.n();
        let dt = grid.dt();
        let nodes: Vec<f64> = (0..n).map(|b| grid.node(b)).collect();
        let mut inv = vec![0.0; n + 1];
        let mut log = vec![0.0; n + 1];
        for b in (0..n).rev() {
            let t = nodes[b];
            inv[b] = inv[b + 1] + dt / t;
            log[b] = log[b + 1] + dt * t.ln() / t;
        }
        Self { nodes, inv, log }
    }

    /// `(∫ lambda dt, ∫ U dt)`, or `None` when the lower rate guard binds.
    fn integrals(&self, mu: f64, lambda_max: f64, dt: f64) -> Option<(f64, f64)> {
        let last = *self.nodes.last()?;
        if !(mu > 0.0) || lambda_max <= RATE_FLOOR || 1.0 / (last * mu) < RATE_FLOOR {
            return None;
        }
        let c = self.nodes.partition_point(|&t| 1.0 / (t * mu) >= lambda_max);
        let li = c as f64 * dt * lambda_max + self.inv[c] / mu;
        let ui = lambda_max.ln() * (self.inv[0] - self.inv[c]) - mu.ln() * self.inv[c] - self.log[c];
        Some((li, ui))
    }
}

/// Monte Carlo estimates of the channel-dependent integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationEstimates {
    /// `E ∫ pi C dt` per link (bits).
    pub capacity: Vec<f64>,
    pub capacity_se: Vec<f64>,
    /// `E ∫ pi P dt` per link (W s).
    pub power: Vec<f64>,
    pub power_se: Vec<f64>,
    /// `E ∫ sum_e pi (ell C - J - nu P) dt` at the multipliers used.
    pub value: f64,
    pub value_se: f64,
    /// Time and link average of the power policy before scheduling (W).
    pub policy_power: f64,
    pub policy_power_se: f64,
}

/// Rate of flow `f` at time `t`.
#[inline]
pub fn flow_rate(u: &Utility, mu: f64, t: f64, lambda_max: f64) -> f64 {
    congestion_optimal_rate(u, mu, t, lambda_max)
}

pub fn deterministic_controls(spec: &ProblemSpec, m: &Multipliers) -> DeterministicControls {
    let mut out = DeterministicControls {
        lambda: Vec::with_capacity(spec.flows.len()),
        lambda_int: Vec::with_capacity(spec.flows.len()),
        utility_int: Vec::with_capacity(spec.flows.len()),
        routing: Vec::with_capacity(spec.flows.destinations.len()),
        time_divided: None,
    };
    fill_deterministic(spec, m, &mut out);
    out
}

/// Same as [`deterministic_controls`], reusing `out`'s buffers.
pub(crate) fn fill_deterministic(spec: &ProblemSpec, m: &Multipliers, out: &mut DeterministicControls) {
    let grid = &spec.grid;
    let dt = grid.dt();
    let horizon = dt * grid.n() as f64;
    let p = &spec.network.params;
    out.lambda.clear();
    out.lambda_int.clear();
    out.utility_int.clear();
    for (f, u) in spec.flows.flows.iter().zip(&spec.utilities) {
        let d = spec.flows.destination_index(f.destination).expect("flow destination is listed");
        let mu = m.mu[d][f.source];
        if *u == Utility::LogOverTime && grid.s() > 0.0 {
            let sums = out.time_divided.get_or_insert_with(|| TimeDividedSums::new(grid));
            if let Some((li, ui)) = sums.integrals(mu, p.lambda_max, dt) {
                out.lambda.push(flow_rate(u, mu, grid.s(), p.lambda_max));
                out.lambda_int.push(li);
                out.utility_int.push(ui);
                continue;
            }
        }
        if u.is_time_varying() {
            let (mut li, mut ui) = (0.0, 0.0);
            for b in 0..grid.n() {
                let t = grid.node(b);
                let l = flow_rate(u, mu, t, p.lambda_max);
                li += l * dt;
                ui += u.value(l.max(RATE_FLOOR), t) * dt;
            }
            out.lambda.push(flow_rate(u, mu, grid.s(), p.lambda_max));
            out.lambda_int.push(li);
            out.utility_int.push(ui);
        } else {
            let l = flow_rate(u, mu, grid.s(), p.lambda_max);
            out.lambda.push(l);
            out.lambda_int.push(l * horizon);
            out.utility_int.push(u.value(l.max(RATE_FLOOR), grid.s()) * horizon);
        }
    }
    let net = &spec.network;
    out.routing.resize(spec.flows.destinations.len(), Vec::new());
    for (k, &d) in spec.flows.destinations.iter().enumerate() {
        let row = &mut out.routing[k];
        row.clear();
        row.extend(net.links().iter().enumerate().map(|(e, l)| {
            if l.from == d {
                0.0
            } else {
                routing_optimal(m.mu[k][l.from], m.mu[k][l.to], m.ell[e], p.r_max)
            }
        }));
    }
}

/// Families up to this size are scheduled by a direct scan.
const SCAN_LIMIT: usize = 4096;

/// Per-path accumulators.
#[derive(Debug, Clone)]
pub(crate) struct PathSums {
    pub capacity: Vec<f64>,
    pub power: Vec<f64>,
    pub value: f64,
    pub policy: f64,
}

/// Link prices: `ell` of the link and `nu` of its transmitter.
pub(crate) fn link_prices(spec: &ProblemSpec, m: &Multipliers) -> Vec<PowerPrices> {
    spec.network
        .links()
        .iter()
        .enumerate()
        .map(|(e, l)| PowerPrices {
            ell: m.ell[e],
            nu: m.nu[l.from],
        })
        .collect()
}

/// One Monte Carlo pass over every path of `bank`.
pub(crate) fn path_sums(spec: &ProblemSpec, bank: &ChannelBank, m: &Multipliers) -> Vec<PathSums> {
    let prices = link_prices(spec, m);
    // scanning a small family beats branch and bound
    let small_family = spec.family.as_ref().is_some_and(|f| f.len() <= SCAN_LIMIT);
    let solver = if spec.mode == Mode::P2 && spec.scheduling && !small_family {
        MaxWeightSolver::new(&spec.conflicts).ok()
    } else {
        None
    };
    let flat = spec.family.as_ref().filter(|_| small_family).map(FlatFamily::new);
    (0..bank.paths())
        .into_par_iter()
        .map(|path| match spec.mode {
            Mode::P2 => orthogonal_path(spec, bank, path, &prices, solver.as_ref(), flat.as_ref()),
            Mode::P1 => shared_path(spec, bank, path, &prices),
        })
        .collect()
}

/// Independent sets stored back to back for the per-step scan.
struct FlatFamily {
    members: Vec<u32>,
    ends: Vec<usize>,
}

impl FlatFamily {
    fn new(family: &crate::network::IndependentSetFamily) -> Self {
        let mut members = Vec::new();
        let mut ends = Vec::with_capacity(family.len());
        for set in family.sets() {
            members.extend(set.iter().map(|&e| e as u32));
            ends.push(members.len());
        }
        Self { members, ends }
    }

    /// Members of the first set of largest weight, as in
    /// [`crate::layers::schedule_max_weight`] on clipped weights.
    fn best(&self, positive: &[f64]) -> &[u32] {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        let mut start = 0;
        for &end in &self.ends {
            let v: f64 = self.members[start..end].iter().map(|&e| positive[e as usize]).sum();
            if v > best.0 {
                best = (v, start, end);
            }
            start = end;
        }
        &self.members[best.1..best.2]
    }
}

fn orthogonal_path(
    spec: &ProblemSpec,
    bank: &ChannelBank,
    path: usize,
    prices: &[PowerPrices],
    solver: Option<&MaxWeightSolver>,
    flat: Option<&FlatFamily>,
) -> PathSums {
    let links = spec.network.num_links();
    let p = &spec.network.params;
    let dt = spec.grid.dt();
    let mut sums = PathSums {
        capacity: vec![0.0; links],
        power: vec![0.0; links],
        value: 0.0,
        policy: 0.0,
    };
    let mut cap = vec![0.0; links];
    let mut pow = vec![0.0; links];
    let mut weight = vec![0.0; links];
    let mut scratch = Vec::with_capacity(links);
    let mut positive = vec![0.0; links];
    for b in 0..bank.steps() {
        let gains = bank.at(path, b);
        for e in 0..links {
            let a = gains[e];
            let pw = if spec.power_control {
                power_optimal(spec.cost, a, prices[e], p.bandwidth, p.noise, p.p_min, p.p_max)
            } else {
                spec.p_fixed
            };
            let c = capacity_orthogonal(p.bandwidth, a, pw, p.noise);
            pow[e] = pw;
            cap[e] = c;
            weight[e] = -spec.cost.value(pw) + prices[e].ell * c - prices[e].nu * pw;
            sums.policy += pw;
        }
        if spec.scheduling {
            match solver {
                Some(s) => {
                    let chosen = s.solve(&weight, &mut scratch);
                    for e in 0..links {
                        if chosen.is_active(e) {
                            sums.capacity[e] += cap[e] * dt;
                            sums.power[e] += pow[e] * dt;
                        }
                    }
                    sums.value += chosen.value * dt;
                }
                None => {
                    let family = flat.expect("scanned when no solver");
                    for (w, p) in positive.iter_mut().zip(&weight) {
                        *w = p.max(0.0);
                    }
                    for &e in family.best(&positive) {
                        let e = e as usize;
                        if weight[e] > 0.0 {
                            sums.capacity[e] += cap[e] * dt;
                            sums.power[e] += pow[e] * dt;
                            sums.value += weight[e] * dt;
                        }
                    }
                }
            }
        } else {
            for e in 0..links {
                let z = spec.time_shares[e] * dt;
                sums.capacity[e] += z * cap[e];
                sums.power[e] += z * pow[e];
                sums.value += z * weight[e];
            }
        }
    }
    sums.policy /= (links * bank.steps()) as f64;
    sums
}

fn shared_path(spec: &ProblemSpec, bank: &ChannelBank, path: usize, prices: &[PowerPrices]) -> PathSums {
    let net = &spec.network;
    let links = net.num_links();
    let dt = spec.grid.dt();
    let layout = spec.layout.as_ref().expect("validated");
    let mut sums = PathSums {
        capacity: vec![0.0; links],
        power: vec![0.0; links],
        value: 0.0,
        policy: 0.0,
    };
    for b in 0..bank.steps() {
        let gains = LinkGains::from_pairs(layout, bank.at(path, b));
        let powers = if spec.power_control {
            let seed = spec.mc.seed ^ ((path as u64) << 32) ^ b as u64;
            power_nonorthogonal_heuristic(net, &gains, prices, spec.cost, spec.solver.restarts, seed).power
        } else {
            vec![spec.p_fixed; links]
        };
        for e in 0..links {
            let c = capacity_nonorthogonal(net, &gains, &powers, e);
            sums.capacity[e] += c * dt;
            sums.power[e] += powers[e] * dt;
            sums.value += (-spec.cost.value(powers[e]) + prices[e].ell * c - prices[e].nu * powers[e]) * dt;
            sums.policy += powers[e];
        }
    }
    sums.policy /= (links * bank.steps()) as f64;
    sums
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub(crate) fn reduce(sums: &[PathSums]) -> ExpectationEstimates {
    let links = sums.first().map_or(0, |s| s.capacity.len());
    let mut est = ExpectationEstimates {
        capacity: Vec::with_capacity(links),
        capacity_se: Vec::with_capacity(links),
        power: Vec::with_capacity(links),
        power_se: Vec::with_capacity(links),
        value: 0.0,
        value_se: 0.0,
        policy_power: 0.0,
        policy_power_se: 0.0,
    };
    for e in 0..links {
        let (c, cs) = mean_se(sums.iter().map(|s| s.capacity[e]));
        let (p, ps) = mean_se(sums.iter().map(|s| s.power[e]));
        est.capacity.push(c);
        est.capacity_se.push(cs);
        est.power.push(p);
        est.power_se.push(ps);
    }
    (est.value, est.value_se) = mean_se(sums.iter().map(|s| s.value));
    (est.policy_power, est.policy_power_se) = mean_se(sums.iter().map(|s| s.policy));
    est
}

/// Monte Carlo estimates of the channel integrals at multipliers `m`, on
/// paths sampled from the spec's seed.
pub fn estimate_expectations(spec: &ProblemSpec, m: &Multipliers) -> crate::error::Result<ExpectationEstimates> {
    spec.validate()?;
    let bank = ChannelBank::sample(spec, spec.mc.seed)?;
    Ok(reduce(&path_sums(spec, &bank, m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TimeGrid;

    #[test]
    fn time_divided_sums_match_the_node_loop() {
        let grid = TimeGrid::new(1.0, 2.0, 500).unwrap();
        let sums = TimeDividedSums::new(&grid);
        let u = Utility::LogOverTime;
        let dt = grid.dt();
        for (mu, cap) in [(0.3, 0.5), (0.7, 0.5), (1.5, 0.5), (2.0, 0.5), (0.9, 10.0), (4.0, 0.2)] {
            let (mut li, mut ui) = (0.0, 0.0);
            for b in 0..grid.n() {
                let t = grid.node(b);
                let l = congestion_optimal_rate(&u, mu, t, cap);
                li += l * dt;
                ui += u.value(l, t) * dt;
            }
            let (fl, fu) = sums.integrals(mu, cap, dt).unwrap();
            assert!((fl - li).abs() <= 1e-12 * li.abs(), "mu {mu}: {fl} vs {li}");
            assert!((fu - ui).abs() <= 1e-12 * ui.abs().max(1.0), "mu {mu}: {fu} vs {ui}");
        }
        assert!(sums.integrals(0.0, 0.5, dt).is_none());
        assert!(sums.integrals(1e10, 0.5, dt).is_none());
    }
}
