use std::path::Path;

use serde::Serialize;

use super::dual::{RunOutcome, Status};
use super::spec::{Mode, ProblemSpec};
use crate::error::{Error, Result};
use crate::format::{sig9, write_csv};

/// Column ids of the multipliers in [`super::Multipliers::flat`] order:
/// `mu_d{destination}_n{node}`, `l_e{link}`, `nu_n{node}`.
pub fn multiplier_ids(spec: &ProblemSpec) -> Vec<String> {
    let nodes = spec.network.num_nodes();
    let mut ids = Vec::new();
    for &d in &spec.flows.destinations {
        ids.extend((0..nodes).map(|i| format!("mu_d{d}_n{i}")));
    }
    ids.extend((0..spec.network.num_links()).map(|e| format!("l_e{e}")));
    ids.extend((0..nodes).map(|i| format!("nu_n{i}")));
    ids
}

/// Per-iteration trace: `eta,kappa,dual_estimate,dual_se,<multipliers>,subgradient_norm,exact`.
/// Rows with `exact = 0` carry the channel term extended from the last
/// evaluation on the sample paths.
pub fn write_trace_csv(file: &Path, spec: &ProblemSpec, outcome: &RunOutcome) -> Result<()> {
    let mut header = vec!["eta".to_string(), "kappa".into(), "dual_estimate".into(), "dual_se".into()];
    header.extend(multiplier_ids(spec));
    header.push("subgradient_norm".into());
    header.push("exact".into());
    let rows = outcome.trace.entries.iter().map(|t| {
        let mut row = vec![t.eta.to_string(), sig9(t.kappa), sig9(t.dual), sig9(t.dual_se)];
        row.extend(t.multipliers.iter().map(|&x| sig9(x)));
        row.push(sig9(t.subgradient_norm));
        row.push(u8::from(t.exact).to_string());
        row
    });
    write_csv(file, &header, rows)
}

/// `flow,source,destination,rate`.
pub fn write_rates_csv(file: &Path, spec: &ProblemSpec, outcome: &RunOutcome) -> Result<()> {
    let rows = spec.flows.flows.iter().zip(&outcome.recovery.rates).enumerate().map(|(k, (f, r))| {
        vec![k.to_string(), f.source.to_string(), f.destination.to_string(), sig9(*r)]
    });
    write_csv(file, &["flow", "source", "destination", "rate"], rows)
}

/// `link,from,to,capacity,capacity_se,power,power_se,mean_power` with
/// capacity and power as expected integrals over the horizon.
pub fn write_links_csv(file: &Path, spec: &ProblemSpec, outcome: &RunOutcome) -> Result<()> {
    let est = &outcome.estimates;
    let horizon = spec.grid.horizon();
    let rows = spec.network.links().iter().enumerate().map(|(e, l)| {
        vec![
            e.to_string(),
            l.from.to_string(),
            l.to.to_string(),
            sig9(est.capacity[e]),
            sig9(est.capacity_se[e]),
            sig9(est.power[e]),
            sig9(est.power_se[e]),
            sig9(est.power[e] / horizon),
        ]
    });
    write_csv(
        file,
        &["link", "from", "to", "capacity", "capacity_se", "power", "power_se", "mean_power"],
        rows,
    )
}

/// `flow,b,tau,rate` for every grid node.
pub fn write_rate_profiles_csv(file: &Path, spec: &ProblemSpec, outcome: &RunOutcome) -> Result<()> {
    let grid = &spec.grid;
    let rows = outcome.recovery.rate_profiles.iter().enumerate().flat_map(|(f, profile)| {
        profile
            .iter()
            .enumerate()
            .map(move |(b, r)| vec![f.to_string(), b.to_string(), sig9(grid.node(b)), sig9(*r)])
    });
    write_csv(file, &["flow", "b", "tau", "rate"], rows)
}

/// Summary of one run. Every number also appears in one of the CSV files
/// listed in `files`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub converged: bool,
    pub iterations: usize,
    /// P1 duals come from a heuristic inner power step.
    pub heuristic_dual: bool,
    pub dual: f64,
    pub dual_se: f64,
    pub best_dual: f64,
    pub best_dual_se: f64,
    pub primal_candidate: f64,
    pub weak_duality_violations: usize,
    pub rates: Vec<f64>,
    pub summed_utility: f64,
    /// Monte Carlo SE of the summed utility, propagated from the capacity
    /// estimates through the link prices.
    pub summed_utility_se: f64,
    /// Time-averaged expected power of the power policy, averaged over links (W).
    pub mean_link_power: f64,
    pub mean_link_power_se: f64,
    /// Same, weighted by the schedule (W).
    pub mean_scheduled_power: f64,
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(spec: &ProblemSpec, outcome: &RunOutcome) -> Self {
        Self {
            status: outcome.status,
            converged: outcome.status == Status::Converged,
            iterations: outcome.iterations,
            heuristic_dual: spec.mode == Mode::P1 && spec.power_control,
            dual: outcome.dual,
            dual_se: outcome.dual_se,
            best_dual: outcome.best_dual,
            best_dual_se: outcome.best_dual_se,
            primal_candidate: outcome.primal.objective,
            weak_duality_violations: outcome.trace.weak_duality_violations,
            rates: outcome.recovery.rates.clone(),
            summed_utility: summed_utility(spec, &outcome.recovery.rate_profiles),
            summed_utility_se: outcome
                .trace
                .final_multipliers
                .ell
                .iter()
                .zip(&outcome.estimates.capacity_se)
                .map(|(l, se)| (l * se).powi(2))
                .sum::<f64>()
                .sqrt(),
            mean_link_power: outcome.estimates.mean_power,
            mean_link_power_se: outcome.estimates.mean_power_se,
            mean_scheduled_power: outcome.estimates.mean_scheduled_power,
            files: Vec::new(),
        }
    }

    pub fn write_json(&self, file: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(file, text + "\n").map_err(|e| Error::io(file, e))
    }
}

/// `sum_f ∫ U_f(lambda_f(t), t) dt` over the grid.
pub fn summed_utility(spec: &ProblemSpec, profiles: &[Vec<f64>]) -> f64 {
    let grid = &spec.grid;
    spec.utilities
        .iter()
        .zip(profiles)
        .map(|(u, p)| {
            p.iter()
                .enumerate()
                .map(|(b, &l)| u.value(l.max(crate::layers::RATE_FLOOR), grid.node(b)) * grid.dt())
                .sum::<f64>()
        })
        .sum()
}
