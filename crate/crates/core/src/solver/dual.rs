use serde::Serialize;

use super::bank::ChannelBank;
use super::estimate::{
    fill_deterministic, path_sums, reduce, DeterministicControls, ExpectationEstimates, PathSums,
};
use super::multipliers::{converged, step_size, Multipliers};
use super::primal::{primal_candidate, recover_primal_from, PrimalCandidate, PrimalRecovery};
use super::spec::ProblemSpec;
use super::subgradient::fill_subgradients;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
}

/// One recorded iteration. `multipliers` holds the values the dual was
/// evaluated at, in [`Multipliers::flat`] order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub eta: usize,
    pub kappa: f64,
    pub dual: f64,
    pub dual_se: f64,
    pub subgradient_norm: f64,
    pub change: f64,
    /// The channel term was evaluated on the sample paths at this
    /// iteration rather than extended from the last evaluation.
    pub exact: bool,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualTrace {
    pub entries: Vec<TraceEntry>,
    pub iterations: usize,
    pub status: Status,
    /// Iterations whose dual estimate fell below the primal candidate by
    /// more than three standard errors.
    pub weak_duality_violations: usize,
    /// Iterations at which the channel term was evaluated on the paths.
    pub evaluations: usize,
    #[serde(skip)]
    pub routing_sum: Vec<Vec<f64>>,
    pub final_multipliers: Multipliers,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub status: Status,
    pub iterations: usize,
    /// Dual estimate at the final multipliers.
    pub dual: f64,
    pub dual_se: f64,
    /// Smallest dual estimate seen and its standard error.
    pub best_dual: f64,
    pub best_dual_se: f64,
    pub primal: PrimalCandidate,
    pub estimates: FinalEstimates,
    pub recovery: PrimalRecovery,
    pub trace: DualTrace,
}

/// Channel integrals at the final multipliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalEstimates {
    pub capacity: Vec<f64>,
    pub capacity_se: Vec<f64>,
    pub power: Vec<f64>,
    pub power_se: Vec<f64>,
    /// Time and link average of the power policy (W).
    pub mean_power: f64,
    pub mean_power_se: f64,
    /// Time-averaged transmitted power per link, weighted by the schedule.
    pub mean_scheduled_power: f64,
}

impl FinalEstimates {
    fn new(spec: &ProblemSpec, est: &ExpectationEstimates) -> Self {
        let horizon = spec.grid.horizon();
        let links = est.power.len().max(1) as f64;
        Self {
            capacity: est.capacity.clone(),
            capacity_se: est.capacity_se.clone(),
            power: est.power.clone(),
            power_se: est.power_se.clone(),
            mean_power: est.policy_power,
            mean_power_se: est.policy_power_se,
            mean_scheduled_power: est.power.iter().sum::<f64>() / (links * horizon),
        }
    }
}

/// Channel term linearized at a reference point `(ell, nu)`: capacity and
/// power held at their estimates there, value extended linearly. In modes
/// where capacity and power do not depend on the multipliers this is exact
/// everywhere.
struct Linearized {
    sums: Vec<PathSums>,
    est: ExpectationEstimates,
    /// Mean value with the `(ell, nu)` terms removed.
    base: f64,
    ell: Vec<f64>,
    nu: Vec<f64>,
}

impl Linearized {
    fn at(spec: &ProblemSpec, bank: &ChannelBank, m: &Multipliers) -> Self {
        let mut sums = path_sums(spec, bank, m);
        for s in &mut sums {
            s.value -= Self::price_terms(spec, s, m);
        }
        let est = reduce(&sums);
        Self {
            base: est.value,
            sums,
            est,
            ell: m.ell.clone(),
            nu: m.nu.clone(),
        }
    }

    fn price_terms(spec: &ProblemSpec, s: &PathSums, m: &Multipliers) -> f64 {
        let mut v = 0.0;
        for (e, l) in spec.network.links().iter().enumerate() {
            v += m.ell[e] * s.capacity[e] - m.nu[l.from] * s.power[e];
        }
        v
    }

    fn value(&self, spec: &ProblemSpec, m: &Multipliers) -> f64 {
        let mut v = self.base;
        for (e, l) in spec.network.links().iter().enumerate() {
            v += m.ell[e] * self.est.capacity[e] - m.nu[l.from] * self.est.power[e];
        }
        v
    }

    fn value_se(&self, spec: &ProblemSpec, m: &Multipliers) -> f64 {
        let values: Vec<f64> = self.sums.iter().map(|s| s.value + Self::price_terms(spec, s, m)).collect();
        super::estimate::mean_se(values.into_iter()).1
    }

    fn estimates(&self, spec: &ProblemSpec, m: &Multipliers) -> ExpectationEstimates {
        ExpectationEstimates {
            value: self.value(spec, m),
            value_se: self.value_se(spec, m),
            ..self.est.clone()
        }
    }

    /// L1 distance of `(ell, nu)` from the reference point.
    fn drift(&self, m: &Multipliers) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        d(&self.ell, &m.ell) + d(&self.nu, &m.nu)
    }
}

/// Dual function value given the controls and the channel estimates at `m`.
pub(crate) fn dual_value(
    spec: &ProblemSpec,
    m: &Multipliers,
    controls: &DeterministicControls,
    est: &ExpectationEstimates,
) -> f64 {
    let net = &spec.network;
    let horizon = spec.grid.horizon();
    let mut d = controls.utility_int.iter().sum::<f64>();
    for (f, li) in spec.flows.flows.iter().zip(&controls.lambda_int) {
        let k = spec.flows.destination_index(f.destination).expect("listed");
        d -= m.mu[k][f.source] * li;
    }
    for (k, row) in controls.routing.iter().enumerate() {
        for (e, l) in net.links().iter().enumerate() {
            if row[e] != 0.0 {
                d += row[e] * horizon * (m.mu[k][l.from] - m.mu[k][l.to] - m.ell[e]);
            }
        }
    }
    d += est.value;
    d += m.nu.iter().sum::<f64>() * net.params.node_budget;
    d
}

/// Projected stochastic subgradient descent on the dual with step
/// `step_scale / eta`, on one fixed set of sample paths.
pub fn solve_dual(spec: &ProblemSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let net = &spec.network;
    let cfg = &spec.solver;
    let bank = ChannelBank::sample(spec, spec.mc.seed)?;
    let primal = primal_candidate(spec, &bank);
    let mut m = Multipliers::filled(
        &spec.flows.destinations,
        net.num_nodes(),
        net.num_links(),
        cfg.init.mu,
        cfg.init.ell,
        cfg.init.nu,
    );
    let fixed = spec.channel_terms_fixed();
    let mut lin = Linearized::at(spec, &bank, &m);
    let mut controls = DeterministicControls {
        lambda: Vec::new(),
        lambda_int: Vec::new(),
        utility_int: Vec::new(),
        routing: Vec::new(),
        time_divided: None,
    };
    let mut g = m.clone();
    let mut routing_sum = vec![vec![0.0; net.num_links()]; spec.flows.destinations.len()];
    let mut changes: Vec<f64> = Vec::new();
    let mut prev: Vec<f64> = Vec::with_capacity(m.len());
    let mut entries = Vec::new();
    let mut violations = 0;
    let mut evaluations = 1;
    let mut best = f64::INFINITY;
    let mut best_m = m.clone();
    let mut status = Status::MaxIters;
    let mut iterations = 0;
    let mut est = lin.est.clone();

    for eta in 1..=cfg.max_iters {
        iterations = eta;
        let mut exact = fixed || eta == 1;
        if !fixed && eta > 1 && lin.drift(&m) >= cfg.refresh_tol {
            lin = Linearized::at(spec, &bank, &m);
            est.clone_from(&lin.est);
            exact = true;
            evaluations += 1;
        }
        est.value = lin.value(spec, &m);
        fill_deterministic(spec, &m, &mut controls);
        fill_subgradients(spec, &est, &controls, &mut g);
        let dual = dual_value(spec, &m, &controls, &est);
        let record = eta % cfg.trace_stride == 0 || eta == 1 || eta == cfg.max_iters;
        let mut dual_se = None;
        if exact {
            if dual < best {
                best = dual;
                best_m.clone_from(&m);
            }
            if record || dual < primal.objective {
                dual_se = Some(lin.value_se(spec, &m));
            }
            if let Some(s) = dual_se {
                if dual < primal.objective - 3.0 * s {
                    violations += 1;
                }
            }
        }
        for (acc, row) in routing_sum.iter_mut().zip(&controls.routing) {
            for (a, r) in acc.iter_mut().zip(row) {
                *a += r;
            }
        }
        let kappa = step_size(eta, cfg.step_scale)?;
        prev.clear();
        prev.extend(m.flat());
        let mut change = 0.0;
        for (x, gx) in m.flat_mut().zip(g.flat()) {
            let next = (*x + kappa * gx).max(0.0);
            change += (next - *x).abs();
            *x = next;
        }
        changes.push(change);
        let done = converged(&changes, cfg.window, cfg.tol);
        if record || done {
            let dual_se = dual_se.unwrap_or_else(|| lin.value_se(spec, &prev_multipliers(&m, &prev)));
            entries.push(TraceEntry {
                eta,
                kappa,
                dual,
                dual_se,
                exact,
                subgradient_norm: g.flat().map(|x| x * x).sum::<f64>().sqrt(),
                change,
                multipliers: prev.clone(),
            });
        }
        if done {
            status = Status::Converged;
            break;
        }
    }

    let evaluate = |m: &Multipliers| {
        if fixed {
            lin.estimates(spec, m)
        } else {
            reduce(&path_sums(spec, &bank, m))
        }
    };
    let est = evaluate(&m);
    fill_deterministic(spec, &m, &mut controls);
    let dual = dual_value(spec, &m, &controls, &est);
    let best_se;
    if dual < best {
        best = dual;
        best_se = est.value_se;
    } else {
        best_se = evaluate(&best_m).value_se;
    }
    let recovery = recover_primal_from(spec, &routing_sum, iterations, &m);
    Ok(RunOutcome {
        status,
        iterations,
        dual,
        dual_se: est.value_se,
        best_dual: best,
        best_dual_se: best_se,
        primal,
        estimates: FinalEstimates::new(spec, &est),
        recovery,
        trace: DualTrace {
            entries,
            iterations,
            status,
            weak_duality_violations: violations,
            evaluations,
            routing_sum,
            final_multipliers: m,
        },
    })
}

/// Multipliers rebuilt from a flat snapshot.
fn prev_multipliers(shape: &Multipliers, flat: &[f64]) -> Multipliers {
    let mut out = shape.clone();
    for (x, v) in out.flat_mut().zip(flat) {
        *x = *v;
    }
    out
}
