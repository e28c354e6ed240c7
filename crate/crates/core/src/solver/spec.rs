use serde::{Deserialize, Serialize};

use crate::channel::{LtfChannelModel, StfChannelModel, TimeGrid};
use crate::error::{Error, Result};
use crate::layers::{PowerCost, Utility};
use crate::network::{ConflictGraph, FlowSet, IndependentSetFamily, Network, SinrLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Simultaneous transmissions with SINR capacities.
    P1,
    /// Orthogonal access: one independent set at a time.
    P2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ChannelModel {
    Ltf(LtfChannelModel),
    Stf(StfChannelModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    pub quad_substeps: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 200,
            seed: 1,
            quad_substeps: 64,
        }
    }
}

/// Starting value of each multiplier family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMultipliers {
    pub mu: f64,
    pub ell: f64,
    pub nu: f64,
}

impl Default for InitialMultipliers {
    fn default() -> Self {
        Self {
            mu: 1.0,
            ell: 1.0,
            nu: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Step scale: `kappa(eta) = step_scale / eta`.
    pub step_scale: f64,
    pub tol: f64,
    pub window: usize,
    pub max_iters: usize,
    pub init: InitialMultipliers,
    /// Keep every `trace_stride`-th iteration in the trace (first and last
    /// are always kept).
    pub trace_stride: usize,
    /// Random restarts of the shared-medium power heuristic.
    pub restarts: usize,
    /// Re-evaluate multiplier-dependent channel terms only once `(ell, nu)`
    /// has moved this far (L1) from the last evaluation; 0 evaluates every
    /// iteration.
    pub refresh_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_scale: 0.1,
            tol: 1e-3,
            window: 8,
            max_iters: 100_000,
            init: InitialMultipliers::default(),
            trace_stride: 1,
            restarts: 2,
            refresh_tol: 0.0,
        }
    }
}

/// Everything one dual run needs.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub mode: Mode,
    pub power_control: bool,
    pub scheduling: bool,
    /// Transmit power when power control is off (W).
    pub p_fixed: f64,
    /// Per-link time shares used when scheduling is off.
    pub time_shares: Vec<f64>,
    /// One utility per flow.
    pub utilities: Vec<Utility>,
    pub cost: PowerCost,
    pub network: Network,
    pub conflicts: ConflictGraph,
    pub family: Option<IndependentSetFamily>,
    pub flows: FlowSet,
    /// One model per channel: the links first, then any extra
    /// transmitter/receiver pairs of the SINR layout.
    pub channels: Vec<ChannelModel>,
    pub layout: Option<SinrLayout>,
    pub grid: TimeGrid,
    pub mc: McConfig,
    pub solver: SolverConfig,
}

impl ProblemSpec {
    pub fn num_channels(&self) -> usize {
        match (&self.mode, &self.layout) {
            (Mode::P1, Some(l)) => l.pairs.len(),
            _ => self.network.num_links(),
        }
    }

    /// Capacities and powers do not depend on the multipliers.
    pub fn channel_terms_fixed(&self) -> bool {
        !self.power_control && (self.mode == Mode::P1 || !self.scheduling)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.params.validate()?;
        let links = self.network.num_links();
        if self.utilities.len() != self.flows.len() {
            return Err(Error::InvalidProblem(format!(
                "{} utilities for {} flows",
                self.utilities.len(),
                self.flows.len()
            )));
        }
        for u in &self.utilities {
            u.validate().map_err(Error::InvalidProblem)?;
            if u.needs_positive_time() && self.grid.s() <= 0.0 {
                return Err(Error::InvalidProblem("time-divided utilities need s > 0".into()));
            }
        }
        if self.conflicts.len() != links {
            return Err(Error::InvalidProblem("conflict graph does not match the network".into()));
        }
        if self.mode == Mode::P2 {
            match &self.family {
                None => return Err(Error::InvalidProblem("orthogonal mode needs an independent-set family".into())),
                Some(f) if f.num_links() != links => {
                    return Err(Error::InvalidProblem("family does not match the network".into()))
                }
                _ => {}
            }
            if !self.scheduling {
                if self.time_shares.len() != links {
                    return Err(Error::InvalidProblem("need one time share per link".into()));
                }
                if self.time_shares.iter().any(|z| !(0.0..=1.0).contains(z)) {
                    return Err(Error::InvalidProblem("time shares must lie in [0, 1]".into()));
                }
            }
        } else {
            match &self.layout {
                Some(l) if l.num_links == links => {}
                _ => return Err(Error::InvalidProblem("shared-medium mode needs an SINR layout".into())),
            }
        }
        if self.channels.len() != self.num_channels() {
            return Err(Error::InvalidProblem(format!(
                "{} channel models for {} channels",
                self.channels.len(),
                self.num_channels()
            )));
        }
        let p = &self.network.params;
        if !self.power_control && !(self.p_fixed >= 0.0 && self.p_fixed <= p.p_max) {
            return Err(Error::InvalidProblem("p_fixed must lie in [0, p_max]".into()));
        }
        if self.mc.paths == 0 || self.mc.quad_substeps == 0 {
            return Err(Error::InvalidProblem("need at least one path and one quadrature panel".into()));
        }
        let s = &self.solver;
        if !(s.refresh_tol >= 0.0) {
            return Err(Error::InvalidProblem("refresh_tol must be >= 0".into()));
        }
        if !(s.step_scale > 0.0) || !(s.tol > 0.0) || s.window == 0 || s.max_iters == 0 || s.trace_stride == 0 {
            return Err(Error::InvalidProblem("solver settings must be positive".into()));
        }
        for v in [s.init.mu, s.init.ell, s.init.nu] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidProblem("initial multipliers must be >= 0".into()));
            }
        }
        Ok(())
    }
}
