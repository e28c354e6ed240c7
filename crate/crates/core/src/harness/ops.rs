//! Experiment operations behind the command-line runner. Each writes its
//! CSV files (and optional SVG charts) into a directory and returns a
//! structured report with its trend verdicts.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::config::{ChannelKind, CoefSpec, RunConfig, ShapeSpec};
use super::svg::{write_line_chart, Series};
use crate::channel::{
    attenuation_ltf, ltf_step_coefficients, sample_ltf_into, sample_ltf_path, sample_stf_path, write_paths_csv,
    CoefficientFn,
};
use crate::error::{Error, Result};
use crate::format::{sig9, write_csv};
use crate::layers::{congestion_optimal_rate, Utility};
use crate::network::capacity_orthogonal;
use crate::rng::StreamKey;
use crate::solver::{
    multiplier_ids, shortest_route, solve_dual, write_links_csv, write_rate_profiles_csv, write_rates_csv,
    write_trace_csv, ChannelModel, Mode, ProblemSpec, RunOutcome, RunReport,
};

/// One checked claim. `detail` names the compared values, the margin and
/// the standard errors used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub holds: bool,
    pub detail: String,
}

impl Verdict {
    fn new(claim: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Self {
            claim: claim.into(),
            holds,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.holds { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.claim, self.detail)
    }
}

fn write_verdicts(file: &Path, verdicts: &[Verdict]) -> Result<()> {
    let text: String = verdicts.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(file, text).map_err(|e| Error::io(file, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn nondecreasing(values: &[f64]) -> (bool, f64) {
    let worst = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (worst >= 0.0 || values.len() < 2, worst)
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub spec: ProblemSpec,
    pub outcome: RunOutcome,
    pub report: RunReport,
}

/// Solves the configured instance and writes its files into the output
/// directory of the config.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    run_into(cfg, &cfg.output_dir())
}

/// Writes `trace.csv`, `rates.csv`, `links.csv`, `rate_profiles.csv`,
/// `report.json`, plus `paths.csv` and SVG charts when enabled.
pub fn run_into(cfg: &RunConfig, dir: &Path) -> Result<RunArtifacts> {
    create_dir(dir)?;
    let spec = cfg.build_spec()?;
    let outcome = solve_dual(&spec)?;
    let mut report = RunReport::new(&spec, &outcome);
    let mut files = Vec::new();
    let mut out = |name: &str| {
        files.push(name.to_string());
        dir.join(name)
    };
    write_trace_csv(&out("trace.csv"), &spec, &outcome)?;
    write_rates_csv(&out("rates.csv"), &spec, &outcome)?;
    write_links_csv(&out("links.csv"), &spec, &outcome)?;
    write_rate_profiles_csv(&out("rate_profiles.csv"), &spec, &outcome)?;
    if cfg.outputs.emit_paths {
        write_channel_paths(&out("paths.csv"), &spec)?;
    }
    if cfg.outputs.emit_svg {
        write_run_charts(&spec, &outcome, &mut out)?;
    }
    files.push("report.json".into());
    report.files = files;
    report.write_json(&dir.join("report.json"))?;
    Ok(RunArtifacts { spec, outcome, report })
}

/// Power-loss paths of the first channel, all Monte Carlo paths.
fn write_channel_paths(file: &Path, spec: &ProblemSpec) -> Result<()> {
    let grid = &spec.grid;
    let key = |p: usize| StreamKey::new(spec.mc.seed, p as u64, 0);
    let paths = match &spec.channels[0] {
        ChannelModel::Ltf(m) => {
            let coeffs = ltf_step_coefficients(m, grid, spec.mc.quad_substeps)?;
            (0..spec.mc.paths).map(|p| sample_ltf_path(m, &coeffs, key(p))).collect::<Vec<_>>()
        }
        ChannelModel::Stf(m) => (0..spec.mc.paths).map(|p| sample_stf_path(m, grid, key(p))).collect::<Result<_>>()?,
    };
    write_paths_csv(file, grid, &paths)
}

fn write_run_charts(spec: &ProblemSpec, outcome: &RunOutcome, out: &mut impl FnMut(&str) -> std::path::PathBuf) -> Result<()> {
    let ids = multiplier_ids(spec);
    let entries = &outcome.trace.entries;
    let nodes = spec.network.num_nodes();
    let links = spec.network.num_links();
    let column = |k: usize| Series {
        name: ids[k].clone(),
        points: entries.iter().map(|t| (t.eta as f64, t.multipliers[k])).collect(),
    };
    let mu: Vec<Series> = (0..nodes.min(ids.len())).map(column).collect();
    let mu_offset = spec.flows.destinations.len() * nodes;
    let ell: Vec<Series> = (mu_offset..mu_offset + links).map(column).collect();
    write_line_chart(&out("multipliers_mu.svg"), "queue prices, first destination", "iteration", "mu", &mu)?;
    write_line_chart(&out("multipliers_l.svg"), "link prices", "iteration", "l", &ell)?;
    let grid = &spec.grid;
    let rates: Vec<Series> = outcome
        .recovery
        .rate_profiles
        .iter()
        .enumerate()
        .map(|(f, p)| Series {
            name: format!("flow {f}"),
            points: p.iter().enumerate().map(|(b, &r)| (grid.node(b), r)).collect(),
        })
        .collect();
    write_line_chart(&out("rates.svg"), "source rates", "t", "rate", &rates)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaEntry {
    pub label: String,
    /// `None` for a time-varying delta.
    pub delta: Option<f64>,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaSweep {
    pub entries: Vec<DeltaEntry>,
    pub verdicts: Vec<Verdict>,
}

impl DeltaSweep {
    /// Entries with a constant delta, in increasing delta.
    pub fn constant_entries(&self) -> Vec<&DeltaEntry> {
        let mut c: Vec<&DeltaEntry> = self.entries.iter().filter(|e| e.delta.is_some()).collect();
        c.sort_by(|a, b| a.delta.partial_cmp(&b.delta).expect("finite"));
        c
    }
}

fn constant_value(c: &CoefSpec) -> Option<f64> {
    match c {
        CoefSpec::Value(v) | CoefSpec::Shape(ShapeSpec::Constant { value: v }) => Some(*v),
        _ => None,
    }
}

/// Runs every delta on the base config. With `crn` all runs share the base
/// seed; otherwise run `k` uses seed `seed + k`. Each run writes into
/// `run_<k>/`; the sweep writes `sweep_delta.csv` and `verdicts.txt`.
pub fn sweep_delta(base: &RunConfig, deltas: &[CoefSpec], crn: bool, dir: &Path) -> Result<DeltaSweep> {
    if deltas.len() < 2 {
        return Err(Error::config("deltas", "need at least two values"));
    }
    create_dir(dir)?;
    let mut entries = Vec::new();
    for (k, d) in deltas.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.channel.delta = d.clone();
        if !crn {
            cfg.mc.seed = base.mc.seed.wrapping_add(k as u64);
        }
        let delta = constant_value(d);
        let label = delta.map_or_else(|| format!("tv{k}"), |v| format!("{v}"));
        log::info!("delta {label}");
        let run = run_into(&cfg, &dir.join(format!("run_{k}")))?;
        entries.push(DeltaEntry {
            label,
            delta,
            report: run.report,
        });
    }
    let mut sweep = DeltaSweep {
        entries,
        verdicts: Vec::new(),
    };
    sweep.verdicts = delta_verdicts(&sweep, base.problem.power_control);
    write_delta_csv(&dir.join("sweep_delta.csv"), &sweep)?;
    write_verdicts(&dir.join("verdicts.txt"), &sweep.verdicts)?;
    if base.outputs.emit_svg {
        let c = sweep.constant_entries();
        let flows = c.first().map_or(0, |e| e.report.rates.len());
        let series: Vec<Series> = (0..flows)
            .map(|f| Series {
                name: format!("flow {f}"),
                points: c.iter().map(|e| (e.delta.unwrap_or(0.0), e.report.rates[f])).collect(),
            })
            .collect();
        write_line_chart(&dir.join("rates_vs_delta.svg"), "source rates", "delta", "rate", &series)?;
    }
    Ok(sweep)
}

fn delta_verdicts(sweep: &DeltaSweep, power_control: bool) -> Vec<Verdict> {
    let c = sweep.constant_entries();
    let deltas: Vec<f64> = c.iter().map(|e| e.delta.unwrap_or(0.0)).collect();
    let util: Vec<f64> = c.iter().map(|e| e.report.summed_utility).collect();
    let util_se: Vec<f64> = c.iter().map(|e| e.report.summed_utility_se).collect();
    let mut out = Vec::new();
    let (ok, worst) = nondecreasing(&util);
    out.push(Verdict::new(
        "summed utility nondecreasing in delta",
        ok,
        format!("delta {} utility {} se {} smallest step {worst:.3e}", list(&deltas), list(&util), list(&util_se)),
    ));
    let flows = c.first().map_or(0, |e| e.report.rates.len());
    let mut monotone = 0;
    let mut worst_rate = f64::INFINITY;
    for f in 0..flows {
        let r: Vec<f64> = c.iter().map(|e| e.report.rates[f]).collect();
        let (ok, w) = nondecreasing(&r);
        monotone += usize::from(ok);
        worst_rate = worst_rate.min(w);
    }
    out.push(Verdict::new(
        "every flow rate nondecreasing in delta",
        monotone == flows,
        format!("{monotone}/{flows} flows monotone, smallest step {worst_rate:.3e}"),
    ));
    if power_control {
        let p: Vec<f64> = c.iter().map(|e| e.report.mean_link_power).collect();
        let se: Vec<f64> = c.iter().map(|e| e.report.mean_link_power_se).collect();
        let steps: Vec<f64> = p.windows(2).map(|w| w[0] - w[1]).collect();
        let ok = steps.iter().all(|&s| s > 0.0);
        out.push(Verdict::new(
            "mean link power strictly decreasing in delta",
            ok,
            format!("power {} W se {} drops {}", list(&p), list(&se), list(&steps)),
        ));
    }
    let at = |d: f64| c.iter().find(|e| e.delta == Some(d)).map(|e| e.report.summed_utility);
    if let (Some(lo), Some(hi)) = (at(20.0), at(50.0)) {
        for e in sweep.entries.iter().filter(|e| e.delta.is_none()) {
            let u = e.report.summed_utility;
            out.push(Verdict::new(
                format!("{} utility between delta 20 and 50", e.label),
                lo <= u && u <= hi,
                format!("{lo:.6} <= {u:.6} <= {hi:.6} (se {:.3e})", e.report.summed_utility_se),
            ));
        }
    }
    out
}

fn write_delta_csv(file: &Path, sweep: &DeltaSweep) -> Result<()> {
    let flows = sweep.entries.first().map_or(0, |e| e.report.rates.len());
    let mut header: Vec<String> = [
        "label",
        "delta",
        "converged",
        "iterations",
        "summed_utility",
        "summed_utility_se",
        "dual",
        "dual_se",
        "mean_link_power",
        "mean_link_power_se",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..flows).map(|f| format!("rate_{f}")));
    let rows = sweep.entries.iter().map(|e| {
        let r = &e.report;
        let mut row = vec![
            e.label.clone(),
            e.delta.map_or_else(String::new, sig9),
            u8::from(r.converged).to_string(),
            r.iterations.to_string(),
            sig9(r.summed_utility),
            sig9(r.summed_utility_se),
            sig9(r.dual),
            sig9(r.dual_se),
            sig9(r.mean_link_power),
            sig9(r.mean_link_power_se),
        ];
        row.extend(r.rates.iter().map(|&x| sig9(x)));
        row
    });
    write_csv(file, &header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexOrderRow {
    pub delta: f64,
    pub mean_x_end: f64,
    pub se_x_end: f64,
    /// `E ∫ C dt` at the fixed power.
    pub mean_capacity: f64,
    pub se_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexOrderReport {
    pub rows: Vec<ConvexOrderRow>,
    pub verdicts: Vec<Verdict>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Channel-level check of the convex order: the same `paths` normal
/// streams drive the link channel at every delta. Writes
/// `convex_order.csv` and `verdicts.txt`.
pub fn verify_convex_order(base: &RunConfig, deltas: &[f64], paths: usize, dir: &Path) -> Result<ConvexOrderReport> {
    if paths < 1000 {
        return Err(Error::config("mc.M", format!("the convex order check needs at least 1000 paths, got {paths}")));
    }
    if base.channel.model != ChannelKind::Ltf {
        return Err(Error::config("channel.model", "the convex order check uses the ltf model"));
    }
    if deltas.is_empty() {
        return Err(Error::config("deltas", "need at least one value"));
    }
    create_dir(dir)?;
    let grid = base.grid()?;
    let p = &base.problem;
    let dt = grid.dt();
    let mut rows = Vec::new();
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite delta"));
    let mut x = vec![0.0; grid.n() + 1];
    for &d in &sorted {
        let mut cfg = base.clone();
        cfg.channel.delta = CoefSpec::Value(d);
        let model = cfg.ltf_model(0.0)?;
        let coeffs = ltf_step_coefficients(&model, &grid, base.mc.quad_substeps)?;
        let mut ends = Vec::with_capacity(paths);
        let mut caps = Vec::with_capacity(paths);
        for m in 0..paths {
            sample_ltf_into(model.x0, &coeffs, StreamKey::new(base.mc.seed, m as u64, 0), &mut x);
            ends.push(x[grid.n()]);
            let c: f64 = x[..grid.n()]
                .iter()
                .map(|&xb| capacity_orthogonal(p.bandwidth, attenuation_ltf(xb), p.p_fixed, p.noise))
                .sum();
            caps.push(c * dt);
        }
        let (mean_x_end, se_x_end) = mean_se(&ends);
        let (mean_capacity, se_capacity) = mean_se(&caps);
        rows.push(ConvexOrderRow {
            delta: d,
            mean_x_end,
            se_x_end,
            mean_capacity,
            se_capacity,
        });
    }
    let first = &rows[0];
    let z = rows
        .iter()
        .map(|r| {
            let se = r.se_x_end.hypot(first.se_x_end);
            let diff = (r.mean_x_end - first.mean_x_end).abs();
            if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.mean_x_end).collect();
    let x_se: Vec<f64> = rows.iter().map(|r| r.se_x_end).collect();
    let caps: Vec<f64> = rows.iter().map(|r| r.mean_capacity).collect();
    let cap_se: Vec<f64> = rows.iter().map(|r| r.se_capacity).collect();
    let steps: Vec<f64> = caps.windows(2).map(|w| w[1] - w[0]).collect();
    let last = rows.last().expect("non-empty");
    let gap = last.mean_capacity - first.mean_capacity;
    let gap_se = last.se_capacity.hypot(first.se_capacity);
    let verdicts = vec![
        Verdict::new(
            "E[X(T)] invariant in delta within 3 SE",
            z <= 3.0,
            format!("delta {} mean {} se {} largest z {z:.3}", list(&sorted), list(&xs), list(&x_se)),
        ),
        Verdict::new(
            "E[int C dt] strictly increasing in delta",
            steps.iter().all(|&s| s > 0.0),
            format!("mean {} se {} steps {}", list(&caps), list(&cap_se), list(&steps)),
        ),
        Verdict::new(
            "smallest and largest delta separated by more than 3 SE",
            gap > 3.0 * gap_se,
            format!("difference {gap:.6e} vs 3 SE {:.6e}", 3.0 * gap_se),
        ),
    ];
    let csv_rows = rows.iter().map(|r| {
        vec![sig9(r.delta), sig9(r.mean_x_end), sig9(r.se_x_end), sig9(r.mean_capacity), sig9(r.se_capacity)]
    });
    write_csv(
        &dir.join("convex_order.csv"),
        &["delta", "mean_x_end", "se_x_end", "mean_capacity_integral", "se_capacity_integral"],
        csv_rows,
    )?;
    write_verdicts(&dir.join("verdicts.txt"), &verdicts)?;
    Ok(ConvexOrderReport { rows, verdicts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    /// Grid-search optimum of the primal.
    pub primal_star: f64,
    pub lambda_star: f64,
    pub power_star: Vec<f64>,
    pub dual: f64,
    pub dual_se: f64,
    pub solver_rate: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|dual - primal_star| / |primal_star|`.
    pub gap: f64,
}

/// Points per power axis of the oracle grid.
const ORACLE_STEPS: usize = 1000;

fn refuse(msg: impl Into<String>) -> Error {
    Error::OracleRefused(msg.into())
}

/// Brute-force primal optimum of a deterministic P2 instance with at most
/// two links and one flow, compared with the dual solver. Powers are
/// searched on a grid of `1e-3` of their range; for each power vector the
/// rate and time shares are optimal in closed form. Writes `oracle.json`.
pub fn oracle_small_instance(cfg: &RunConfig, dir: &Path) -> Result<OracleReport> {
    let spec = cfg.build_spec()?;
    if spec.mode != Mode::P2 {
        return Err(refuse("only orthogonal-channel instances are supported"));
    }
    let links = spec.network.num_links();
    if links > 2 {
        return Err(refuse(format!("{links} links exceed the oracle budget of 2")));
    }
    if spec.flows.len() != 1 {
        return Err(refuse(format!("{} flows; the oracle takes exactly one", spec.flows.len())));
    }
    let utility = &spec.utilities[0];
    if utility.is_time_varying() {
        return Err(refuse("time-varying utilities are not supported"));
    }
    let mut gains = Vec::with_capacity(links);
    for model in &spec.channels {
        let ChannelModel::Ltf(m) = model else {
            return Err(refuse("the oracle needs the ltf channel"));
        };
        let (CoefficientFn::Constant { .. }, CoefficientFn::Constant { value: gamma }) = (&m.beta, &m.gamma) else {
            return Err(refuse("channel coefficients must be constant"));
        };
        if !m.delta.is_identically_zero() {
            return Err(refuse("delta must be zero"));
        }
        if m.x0 != *gamma {
            return Err(refuse("x0 must equal gamma so the channel is constant"));
        }
        gains.push(attenuation_ltf(*gamma));
    }
    let flow = spec.flows.flows[0];
    let route = shortest_route(&spec.network, flow.source, flow.destination)
        .ok_or_else(|| refuse("the flow has no route"))?;
    let p = &spec.network.params;
    let horizon = spec.grid.horizon();
    let lambda_cap = p.lambda_max.min(p.r_max);
    let powers: Vec<f64> = if spec.power_control {
        (0..=ORACLE_STEPS)
            .map(|k| p.p_min + (p.p_max - p.p_min) * k as f64 / ORACLE_STEPS as f64)
            .collect()
    } else {
        vec![spec.p_fixed]
    };
    // links searched over: the route under scheduling, all links otherwise
    let searched: Vec<usize> = if spec.scheduling { route.clone() } else { (0..links).collect() };
    let conflicting = route.len() == 2 && spec.conflicts.conflicts(route[0], route[1]);
    let mut best = (f64::NEG_INFINITY, 0.0, vec![0.0; links]);
    let mut power = vec![0.0; links];
    let mut index = vec![0usize; searched.len()];
    loop {
        for (k, &e) in searched.iter().enumerate() {
            power[e] = powers[index[k]];
        }
        if let Some((value, lambda)) = oracle_value(&spec, utility, &gains, &power, &route, conflicting, lambda_cap, horizon) {
            if value > best.0 {
                best = (value, lambda, power.clone());
            }
        }
        let mut k = 0;
        while k < index.len() {
            index[k] += 1;
            if index[k] < powers.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
        if k == index.len() {
            break;
        }
    }
    let (primal_star, lambda_star, power_star) = best;
    if !primal_star.is_finite() {
        return Err(refuse("no feasible point on the grid"));
    }
    let outcome = solve_dual(&spec)?;
    let gap = (outcome.best_dual - primal_star).abs() / primal_star.abs().max(f64::MIN_POSITIVE);
    let report = OracleReport {
        primal_star,
        lambda_star,
        power_star,
        dual: outcome.best_dual,
        dual_se: outcome.best_dual_se,
        solver_rate: outcome.recovery.rates[0],
        converged: outcome.status == crate::solver::Status::Converged,
        iterations: outcome.iterations,
        gap,
    };
    create_dir(dir)?;
    let file = dir.join("oracle.json");
    std::fs::write(&file, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&file, e))?;
    Ok(report)
}

/// Best objective and rate for fixed link powers, or `None` if infeasible.
#[allow(clippy::too_many_arguments)]
fn oracle_value(
    spec: &ProblemSpec,
    utility: &Utility,
    gains: &[f64],
    power: &[f64],
    route: &[usize],
    conflicting: bool,
    lambda_cap: f64,
    horizon: f64,
) -> Option<(f64, f64)> {
    let p = &spec.network.params;
    let cap = |e: usize| capacity_orthogonal(p.bandwidth, gains[e], power[e], p.noise);
    let mut node_power = vec![0.0; spec.network.num_nodes()];
    let (lambda, cost) = if spec.scheduling {
        // share z_e = lambda / C_e on route links, idle elsewhere
        let mut ub = lambda_cap;
        let mut inv_sum = 0.0;
        let mut price = 0.0;
        for &e in route {
            let c = cap(e);
            if c <= 0.0 {
                return None;
            }
            inv_sum += 1.0 / c;
            ub = ub.min(c);
            price += spec.cost.value(power[e]) / c;
            let from = spec.network.link(e).from;
            node_power[from] += power[e] * horizon / c;
        }
        if conflicting {
            ub = ub.min(1.0 / inv_sum);
        }
        for &np in &node_power {
            if np > 0.0 {
                ub = ub.min(p.node_budget / np);
            }
        }
        let lambda = congestion_optimal_rate(utility, price, 0.0, ub);
        (lambda, price * lambda)
    } else {
        let mut ub = lambda_cap;
        for &e in route {
            ub = ub.min(spec.time_shares[e] * cap(e));
        }
        let mut cost = 0.0;
        for (e, l) in spec.network.links().iter().enumerate() {
            let z = spec.time_shares[e];
            node_power[l.from] += z * power[e] * horizon;
            cost += z * spec.cost.value(power[e]);
        }
        if node_power.iter().any(|&np| np > p.node_budget * (1.0 + 1e-12)) {
            return None;
        }
        (ub, cost)
    };
    let value = horizon * (utility.value(lambda.max(crate::layers::RATE_FLOOR), 0.0) - cost);
    Some((value, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepRule {
    /// Keep `n` as configured.
    Fixed,
    /// Scale `n` with the horizon so the step `dt` stays as configured.
    Proportional,
}

#[derive(Debug, Clone, Serialize)]
pub struct TRow {
    pub t_end: f64,
    pub n: usize,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TSweep {
    pub rows: Vec<TRow>,
    pub verdicts: Vec<Verdict>,
}

/// Runs each horizon end `T` (with `s` fixed). Writes `sweep_T.csv`.
pub fn sweep_t(base: &RunConfig, ts: &[f64], rule: StepRule, dir: &Path) -> Result<TSweep> {
    if ts.is_empty() {
        return Err(Error::config("Ts", "need at least one value"));
    }
    create_dir(dir)?;
    let mut sorted = ts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite T"));
    let base_len = base.time.t_end - base.time.s;
    let mut rows = Vec::new();
    for (k, &t) in sorted.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.time.t_end = t;
        if rule == StepRule::Proportional {
            cfg.time.n = ((base.time.n as f64 * (t - base.time.s) / base_len).round() as usize).max(1);
        }
        log::info!("T = {t}, n = {}", cfg.time.n);
        let run = run_into(&cfg, &dir.join(format!("run_{k}")))?;
        rows.push(TRow {
            t_end: t,
            n: cfg.time.n,
            report: run.report,
        });
    }
    let iters: Vec<f64> = rows.iter().map(|r| r.report.iterations as f64).collect();
    let (ok, _) = nondecreasing(&iters);
    let flows = rows[0].report.rates.len();
    let mut monotone = 0;
    for f in 0..flows {
        let r: Vec<f64> = rows.iter().map(|row| -row.report.rates[f]).collect();
        monotone += usize::from(nondecreasing(&r).0);
    }
    let verdicts = vec![
        Verdict::new(
            "iterations to convergence nondecreasing in T",
            ok,
            format!("T {} iterations {}", list(&sorted), list(&iters)),
        ),
        Verdict::new(
            "every flow rate nonincreasing in T",
            monotone == flows,
            format!("{monotone}/{flows} flows monotone"),
        ),
    ];
    let mut header = vec!["T".to_string(), "n".into(), "converged".into(), "iterations".into(), "summed_utility".into()];
    header.extend((0..flows).map(|f| format!("rate_{f}")));
    let csv_rows = rows.iter().map(|r| {
        let mut row = vec![
            sig9(r.t_end),
            r.n.to_string(),
            u8::from(r.report.converged).to_string(),
            r.report.iterations.to_string(),
            sig9(r.report.summed_utility),
        ];
        row.extend(r.report.rates.iter().map(|&x| sig9(x)));
        row
    });
    write_csv(&dir.join("sweep_T.csv"), &header, csv_rows)?;
    write_verdicts(&dir.join("verdicts.txt"), &verdicts)?;
    Ok(TSweep { rows, verdicts })
}

/// A beta schedule: `values[k]` holds on the `k`-th of `values.len()`
/// equal parts of `[s, T]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSchedule {
    pub label: String,
    pub values: Vec<f64>,
}

impl BetaSchedule {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    fn coefficient(&self, s: f64, t_end: f64) -> CoefSpec {
        let parts = self.values.len();
        let breakpoints = (1..parts).map(|k| s + (t_end - s) * k as f64 / parts as f64).collect();
        CoefSpec::Shape(ShapeSpec::PiecewiseConstant {
            breakpoints,
            values: self.values.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaRow {
    pub label: String,
    pub values: Vec<f64>,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaComparison {
    pub rows: Vec<BetaRow>,
    pub verdicts: Vec<Verdict>,
}

/// Runs each beta schedule; the verdict compares the first two summed
/// utilities (first expected at least as large). Writes `tv_beta.csv`.
pub fn run_time_varying_beta(base: &RunConfig, schedules: &[BetaSchedule], dir: &Path) -> Result<BetaComparison> {
    if schedules.len() < 2 {
        return Err(Error::config("beta", "need at least two schedules"));
    }
    create_dir(dir)?;
    let (s, t) = (base.time.s, base.time.t_end);
    let mut rows = Vec::new();
    for (k, sched) in schedules.iter().enumerate() {
        if sched.values.is_empty() || sched.values.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::config("beta", format!("schedule {} needs positive values", sched.label)));
        }
        let mut cfg = base.clone();
        cfg.channel.beta = sched.coefficient(s, t);
        let run = run_into(&cfg, &dir.join(format!("run_{k}")))?;
        rows.push(BetaRow {
            label: sched.label.clone(),
            values: sched.values.clone(),
            report: run.report,
        });
    }
    let (a, b) = (&rows[0].report, &rows[1].report);
    let verdicts = vec![Verdict::new(
        format!("{} summed utility >= {}", rows[0].label, rows[1].label),
        a.summed_utility >= b.summed_utility,
        format!(
            "{:.6} (se {:.3e}) vs {:.6} (se {:.3e}), margin {:.3e}",
            a.summed_utility,
            a.summed_utility_se,
            b.summed_utility,
            b.summed_utility_se,
            a.summed_utility - b.summed_utility
        ),
    )];
    let flows = rows[0].report.rates.len();
    let mut header = vec!["label".to_string(), "beta".into(), "converged".into(), "summed_utility".into(), "summed_utility_se".into()];
    header.extend((0..flows).map(|f| format!("rate_{f}")));
    let csv_rows = rows.iter().map(|r| {
        let betas: Vec<String> = r.values.iter().map(|&v| sig9(v)).collect();
        let mut row = vec![
            r.label.clone(),
            betas.join(" "),
            u8::from(r.report.converged).to_string(),
            sig9(r.report.summed_utility),
            sig9(r.report.summed_utility_se),
        ];
        row.extend(r.report.rates.iter().map(|&x| sig9(x)));
        row
    });
    write_csv(&dir.join("tv_beta.csv"), &header, csv_rows)?;
    write_verdicts(&dir.join("verdicts.txt"), &verdicts)?;
    Ok(BetaComparison { rows, verdicts })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateCurves {
    pub tau: Vec<f64>,
    /// `curves[f][b]`: source rate of flow `f` at node `b`.
    pub curves: Vec<Vec<f64>>,
    /// Final price at each flow's source.
    pub mu: Vec<f64>,
    pub report: RunReport,
    pub verdicts: Vec<Verdict>,
}

/// Solves the instance and checks the source-rate curves: each equals the
/// clipped congestion optimum at the final prices and, for a utility that
/// decays in time, decreases wherever it is not clipped. Writes
/// `rate_curves.csv` with columns `flow,b,tau,rate,mu`.
pub fn run_time_varying_utilities(cfg: &RunConfig, dir: &Path) -> Result<RateCurves> {
    let run = run_into(cfg, dir)?;
    let spec = &run.spec;
    let m = &run.outcome.trace.final_multipliers;
    let grid = &spec.grid;
    let tau = grid.nodes()[..grid.n()].to_vec();
    let curves = run.outcome.recovery.rate_profiles.clone();
    let lambda_max = spec.network.params.lambda_max;
    let mu: Vec<f64> = spec
        .flows
        .flows
        .iter()
        .map(|f| m.mu[spec.flows.destination_index(f.destination).expect("listed")][f.source])
        .collect();
    let mut clip_err: f64 = 0.0;
    let mut shape_ok = true;
    for (f, curve) in curves.iter().enumerate() {
        let u = &spec.utilities[f];
        for (b, &r) in curve.iter().enumerate() {
            clip_err = clip_err.max((r - congestion_optimal_rate(u, mu[f], tau[b], lambda_max)).abs());
        }
        for w in curve.windows(2) {
            let ok = if u.is_time_varying() {
                w[1] < w[0] || (w[1] == w[0] && w[0] >= lambda_max)
            } else {
                w[1] == w[0]
            };
            shape_ok &= ok || !mu[f].is_finite();
        }
    }
    let varying = spec.utilities.iter().any(Utility::is_time_varying);
    let verdicts = vec![
        Verdict::new(
            "rates equal the clipped optimum at the final prices",
            clip_err <= 1e-12,
            format!("largest deviation {clip_err:.3e}, lambda_max {lambda_max}"),
        ),
        Verdict::new(
            if varying {
                "every curve strictly decreasing in t below lambda_max"
            } else {
                "every curve constant in t"
            },
            shape_ok,
            format!("{} flows over {} nodes", curves.len(), tau.len()),
        ),
    ];
    let rows = curves.iter().enumerate().flat_map(|(f, c)| {
        let tau = &tau;
        let mu = mu[f];
        c.iter()
            .enumerate()
            .map(move |(b, &r)| vec![f.to_string(), b.to_string(), sig9(tau[b]), sig9(r), sig9(mu)])
    });
    write_csv(&dir.join("rate_curves.csv"), &["flow", "b", "tau", "rate", "mu"], rows)?;
    write_verdicts(&dir.join("verdicts.txt"), &verdicts)?;
    Ok(RateCurves {
        tau,
        curves,
        mu,
        report: run.report,
        verdicts,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NRow {
    pub n: usize,
    pub iterations_invariant: usize,
    pub converged_invariant: bool,
    pub iterations_varying: usize,
    pub converged_varying: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NSweep {
    pub rows: Vec<NRow>,
    pub verdicts: Vec<Verdict>,
}

/// Iterations to convergence per `n`, for the configured utility with a
/// time-invariant log utility and for `ln(lambda)/t`. The time-divided runs
/// move the horizon to `[1, 2]` when `s` is not positive. Writes
/// `sweep_n.csv`.
pub fn sweep_n(base: &RunConfig, ns: &[usize], dir: &Path) -> Result<NSweep> {
    if ns.is_empty() {
        return Err(Error::config("ns", "need at least one value"));
    }
    create_dir(dir)?;
    let mut rows = Vec::new();
    for &n in ns {
        let mut inv = base.clone();
        inv.time.n = n;
        if inv.problem.utility.is_time_varying() {
            inv.problem.utility = Utility::default();
        }
        let a = run_into(&inv, &dir.join(format!("invariant_n{n}")))?.report;
        let mut var = inv.clone();
        var.problem.utility = Utility::LogOverTime;
        if var.time.s <= 0.0 {
            var.time.s = 1.0;
            var.time.t_end = 2.0;
        }
        let b = run_into(&var, &dir.join(format!("varying_n{n}")))?.report;
        rows.push(NRow {
            n,
            iterations_invariant: a.iterations,
            converged_invariant: a.converged,
            iterations_varying: b.iterations,
            converged_varying: b.converged,
        });
    }
    let counts: Vec<f64> = rows.iter().map(|r| r.iterations_invariant as f64).collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let spread = counts.iter().map(|c| (c - mean).abs() / mean).fold(0.0, f64::max);
    let verdicts = vec![Verdict::new(
        "time-invariant iteration counts within 20% of their mean",
        spread <= 0.2,
        format!("counts {} largest relative deviation {spread:.3}", list(&counts)),
    )];
    let csv_rows = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.iterations_invariant.to_string(),
            u8::from(r.converged_invariant).to_string(),
            r.iterations_varying.to_string(),
            u8::from(r.converged_varying).to_string(),
        ]
    });
    write_csv(
        &dir.join("sweep_n.csv"),
        &["n", "iterations_invariant", "converged_invariant", "iterations_varying", "converged_varying"],
        csv_rows,
    )?;
    write_verdicts(&dir.join("verdicts.txt"), &verdicts)?;
    Ok(NSweep { rows, verdicts })
}
