use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{CoefficientFn, LtfChannelModel, StfChannelModel, TimeGrid};
use crate::error::{Error, Result};
use crate::layers::{PowerCost, Utility};
use crate::network::{
    assign_random_flows, build_grid, conflict_sets, enumerate_maximal_independent_sets, Flow, FlowSet,
    InterferenceModel, Link, Network, PhysicalParams, SinrLayout, DEFAULT_FAMILY_CAP,
};
use crate::solver::{ChannelModel, InitialMultipliers, McConfig, Mode, ProblemSpec, SolverConfig};

/// A coefficient in a config file: a bare number or a shape table. Shapes
/// tied to the horizon default their `origin` to `s` and `length` to `T - s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefSpec {
    Value(f64),
    Shape(ShapeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    Constant {
        value: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    DampedOscillation {
        base: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
        origin: Option<f64>,
        length: Option<f64>,
    },
    Sinusoid {
        offset: f64,
        amplitude: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
        origin: Option<f64>,
        length: Option<f64>,
    },
}

fn default_amplitude() -> f64 {
    0.15
}

fn default_decay() -> f64 {
    2.0
}

fn default_frequency() -> f64 {
    10.0 * PI
}

impl CoefSpec {
    pub fn resolve(&self, s: f64, t_end: f64) -> Result<CoefficientFn> {
        let f = match self.clone() {
            CoefSpec::Value(value) => CoefficientFn::Constant { value },
            CoefSpec::Shape(ShapeSpec::Constant { value }) => CoefficientFn::Constant { value },
            CoefSpec::Shape(ShapeSpec::PiecewiseConstant { breakpoints, values }) => {
                CoefficientFn::PiecewiseConstant { breakpoints, values }
            }
            CoefSpec::Shape(ShapeSpec::DampedOscillation {
                base,
                amplitude,
                decay,
                frequency,
                origin,
                length,
            }) => CoefficientFn::DampedOscillation {
                base,
                amplitude,
                decay,
                frequency,
                origin: origin.unwrap_or(s),
                length: length.unwrap_or(t_end - s),
            },
            CoefSpec::Shape(ShapeSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
                origin,
                length,
            }) => CoefficientFn::Sinusoid {
                offset,
                amplitude,
                frequency,
                origin: origin.unwrap_or(s),
                length: length.unwrap_or(t_end - s),
            },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub rows: usize,
    pub cols: usize,
    pub interference: InterferenceModel,
    pub traffic_seed: u64,
    /// Edge list file (`from to` per line) replacing the grid.
    pub edge_list: Option<PathBuf>,
    /// Inline `[from, to]` links replacing the grid.
    pub edges: Option<Vec<[usize; 2]>>,
    /// Explicit `[source, destination]` flows replacing the random ones.
    pub flows: Option<Vec<[usize; 2]>>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 4,
            interference: InterferenceModel::TwoHop,
            traffic_seed: 1,
            edge_list: None,
            edges: None,
            flows: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Ltf,
    Stf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub model: ChannelKind,
    pub beta: CoefSpec,
    pub gamma: CoefSpec,
    pub delta: CoefSpec,
    /// Initial power loss (dB); defaults to `gamma(s)`.
    pub x0: Option<f64>,
    /// Extra loss (dB) of interference paths that are not links.
    pub cross_offset_db: f64,
    pub a_i: CoefSpec,
    pub a_q: CoefSpec,
    pub b_i: CoefSpec,
    pub b_q: CoefSpec,
    pub c_i: f64,
    pub c_q: f64,
    pub x_i0: f64,
    pub x_q0: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            model: ChannelKind::Ltf,
            beta: CoefSpec::Value(100.0),
            gamma: CoefSpec::Shape(ShapeSpec::DampedOscillation {
                base: 70.0,
                amplitude: default_amplitude(),
                decay: default_decay(),
                frequency: default_frequency(),
                origin: None,
                length: None,
            }),
            delta: CoefSpec::Value(0.0),
            x0: None,
            cross_offset_db: 6.0,
            a_i: CoefSpec::Value(-100.0),
            a_q: CoefSpec::Value(-100.0),
            b_i: CoefSpec::Value(3.2e-3),
            b_q: CoefSpec::Value(3.2e-3),
            c_i: 1.0,
            c_q: 1.0,
            x_i0: 2.2e-4,
            x_q0: 2.2e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub s: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            s: 0.0,
            t_end: 1.0,
            n: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(rename = "M")]
    pub paths: usize,
    pub seed: u64,
    pub quad_substeps: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        let d = McConfig::default();
        Self {
            paths: d.paths,
            seed: d.seed,
            quad_substeps: d.quad_substeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub mode: Mode,
    pub power_control: bool,
    pub scheduling: bool,
    pub utility: Utility,
    /// Quadratic power cost `V P^2`; zero disables the cost.
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "N0")]
    pub noise: f64,
    #[serde(rename = "B")]
    pub bandwidth: f64,
    #[serde(rename = "P_fixed")]
    pub p_fixed: f64,
    #[serde(rename = "P_min")]
    pub p_min: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "P_i_max")]
    pub node_budget: f64,
    pub lambda_max: f64,
    #[serde(rename = "R_max")]
    pub r_max: f64,
    /// Common time share of every link when scheduling is off; defaults to
    /// equal time for every maximal independent set.
    pub time_share: Option<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self {
            mode: Mode::P2,
            power_control: false,
            scheduling: false,
            utility: Utility::default(),
            v: 0.0,
            noise: p.noise,
            bandwidth: p.bandwidth,
            p_fixed: 2.0,
            p_min: p.p_min,
            p_max: p.p_max,
            node_budget: p.node_budget,
            lambda_max: p.lambda_max,
            r_max: p.r_max,
            time_share: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    #[serde(rename = "A_prime")]
    pub step_scale: f64,
    pub tol: f64,
    pub window: usize,
    pub max_iters: usize,
    pub trace_stride: usize,
    pub restarts: usize,
    pub refresh_tol: f64,
    pub init_mu: f64,
    pub init_l: f64,
    pub init_nu: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            step_scale: d.step_scale,
            tol: d.tol,
            window: d.window,
            max_iters: d.max_iters,
            trace_stride: d.trace_stride,
            restarts: d.restarts,
            refresh_tol: d.refresh_tol,
            init_mu: d.init.mu,
            init_l: d.init.ell,
            init_nu: d.init.nu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub emit_paths: bool,
    pub emit_svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            emit_paths: false,
            emit_svg: false,
        }
    }
}

/// Environment variable that replaces `outputs.directory`.
pub const OUTPUT_DIR_ENV: &str = "STOCHNUM_OUT";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topology: TopologyConfig,
    pub channel: ChannelConfig,
    pub time: TimeConfig,
    pub mc: MonteCarloConfig,
    pub problem: ProblemConfig,
    pub solver: SolverSection,
    pub outputs: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // relative edge lists are resolved against the config file
        if let (Some(edges), Some(dir)) = (&cfg.topology.edge_list, path.parent()) {
            if edges.is_relative() {
                cfg.topology.edge_list = Some(dir.join(edges));
            }
        }
        Ok(cfg)
    }

    /// Output directory, honoring [`OUTPUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.outputs.directory.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.time;
        if !(t.s.is_finite() && t.t_end.is_finite()) {
            return Err(Error::config("time", "s and T must be finite"));
        }
        if t.t_end <= t.s {
            return Err(Error::config("time.T", format!("T = {} must exceed s = {}", t.t_end, t.s)));
        }
        if t.n == 0 {
            return Err(Error::config("time.n", "need at least one step"));
        }
        if self.problem.utility.needs_positive_time() && t.s <= 0.0 {
            return Err(Error::config("time.s", "a time-divided utility needs s > 0"));
        }
        if let Err(e) = self.problem.utility.validate() {
            return Err(Error::config("problem.utility", e));
        }
        if self.topology.edges.is_some() && self.topology.edge_list.is_some() {
            return Err(Error::config("topology", "give either edges or edge_list"));
        }
        if self.topology.edge_list.is_none() && self.topology.edges.is_none() && (self.topology.rows == 0 || self.topology.cols == 0) {
            return Err(Error::config("topology", "rows and cols must be positive"));
        }
        if self.mc.paths == 0 {
            return Err(Error::config("mc.M", "need at least one path"));
        }
        if self.mc.quad_substeps == 0 {
            return Err(Error::config("mc.quad_substeps", "must be positive"));
        }
        let p = &self.problem;
        for (key, v) in [
            ("problem.N0", p.noise),
            ("problem.B", p.bandwidth),
            ("problem.P_max", p.p_max),
            ("problem.P_i_max", p.node_budget),
            ("problem.R_max", p.r_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if !(p.lambda_max.is_finite() && p.lambda_max >= 0.0) {
            return Err(Error::config("problem.lambda_max", "must be >= 0"));
        }
        if !(p.p_min >= 0.0 && p.p_min <= p.p_max) {
            return Err(Error::config("problem.P_min", "need 0 <= P_min <= P_max"));
        }
        if !(p.p_fixed >= 0.0 && p.p_fixed <= p.p_max) {
            return Err(Error::config("problem.P_fixed", "must lie in [0, P_max]"));
        }
        if !(p.v.is_finite() && p.v >= 0.0) {
            return Err(Error::config("problem.V", "must be >= 0"));
        }
        if let Some(z) = p.time_share {
            if !(0.0..=1.0).contains(&z) {
                return Err(Error::config("problem.time_share", "must lie in [0, 1]"));
            }
        }
        let s = &self.solver;
        if !(s.step_scale.is_finite() && s.step_scale > 0.0) {
            return Err(Error::config("solver.A_prime", "must be positive"));
        }
        if !(s.refresh_tol.is_finite() && s.refresh_tol >= 0.0) {
            return Err(Error::config("solver.refresh_tol", "must be >= 0"));
        }
        if !(s.tol > 0.0) {
            return Err(Error::config("solver.tol", "must be positive"));
        }
        for (key, v) in [
            ("solver.window", s.window),
            ("solver.max_iters", s.max_iters),
            ("solver.trace_stride", s.trace_stride),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        for (key, v) in [("solver.init_mu", s.init_mu), ("solver.init_l", s.init_l), ("solver.init_nu", s.init_nu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(key, "must be >= 0"));
            }
        }
        for (key, c) in [
            ("channel.beta", &self.channel.beta),
            ("channel.gamma", &self.channel.gamma),
            ("channel.delta", &self.channel.delta),
        ] {
            c.resolve(t.s, t.t_end).map_err(|e| Error::config(key, e.to_string()))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.s, self.time.t_end, self.time.n)
    }

    pub fn physical(&self) -> PhysicalParams {
        let p = &self.problem;
        PhysicalParams {
            bandwidth: p.bandwidth,
            noise: p.noise,
            p_min: p.p_min,
            p_max: p.p_max,
            node_budget: p.node_budget,
            r_max: p.r_max,
            lambda_max: p.lambda_max,
        }
    }

    pub fn network(&self) -> Result<Network> {
        let topo = &self.topology;
        let mut net = match (&topo.edges, &topo.edge_list) {
            (Some(edges), _) => {
                let links: Vec<Link> = edges.iter().map(|&[from, to]| Link { from, to }).collect();
                let n = links.iter().map(|l| l.from.max(l.to) + 1).max().unwrap_or(0);
                Network::from_links(n, links)?
            }
            (None, Some(path)) => Network::load_edge_list(path)?,
            (None, None) => build_grid(topo.rows, topo.cols)?,
        };
        net.params = self.physical();
        Ok(net)
    }

    /// LTF model of a link, with `offset_db` added to the mean loss.
    pub fn ltf_model(&self, offset_db: f64) -> Result<LtfChannelModel> {
        let (s, t) = (self.time.s, self.time.t_end);
        let c = &self.channel;
        let mut gamma = c.gamma.resolve(s, t)?;
        if offset_db != 0.0 {
            gamma = shift(gamma, offset_db);
        }
        let x0 = c.x0.map_or_else(|| gamma.eval(s), |x| x + offset_db);
        LtfChannelModel::new(c.beta.resolve(s, t)?, gamma, c.delta.resolve(s, t)?, x0)
    }

    pub fn stf_model(&self, offset_db: f64) -> Result<StfChannelModel> {
        let (s, t) = (self.time.s, self.time.t_end);
        let c = &self.channel;
        // amplitude scales by the square root of the power offset
        let scale = 10f64.powf(-offset_db / 20.0);
        let m = StfChannelModel {
            a_i: c.a_i.resolve(s, t)?,
            a_q: c.a_q.resolve(s, t)?,
            b_i: c.b_i.resolve(s, t)?,
            b_q: c.b_q.resolve(s, t)?,
            c_i: c.c_i * scale,
            c_q: c.c_q * scale,
            x_i0: c.x_i0,
            x_q0: c.x_q0,
        };
        m.validate()?;
        Ok(m)
    }

    fn channel_model(&self, offset_db: f64) -> Result<ChannelModel> {
        Ok(match self.channel.model {
            ChannelKind::Ltf => ChannelModel::Ltf(self.ltf_model(offset_db)?),
            ChannelKind::Stf => ChannelModel::Stf(self.stf_model(offset_db)?),
        })
    }

    /// Problem instance described by this config.
    pub fn build_spec(&self) -> Result<ProblemSpec> {
        self.validate()?;
        let network = self.network()?;
        let conflicts = conflict_sets(&network, self.topology.interference);
        let flows = match &self.topology.flows {
            Some(pairs) => {
                for &[src, dst] in pairs {
                    if src == dst || src >= network.num_nodes() || dst >= network.num_nodes() {
                        return Err(Error::config("topology.flows", format!("bad flow [{src}, {dst}]")));
                    }
                }
                let list = pairs.iter().map(|&[source, destination]| Flow { source, destination }).collect();
                FlowSet::new(&network, list)
            }
            None => assign_random_flows(&network, self.topology.traffic_seed),
        };
        let grid = self.grid()?;
        let p = &self.problem;
        let (family, layout) = match p.mode {
            Mode::P2 => (Some(enumerate_maximal_independent_sets(&conflicts, DEFAULT_FAMILY_CAP)?), None),
            Mode::P1 => (None, Some(SinrLayout::new(&network, &conflicts))),
        };
        let links = network.num_links();
        let time_shares = match (p.time_share, &family) {
            (Some(z), _) => vec![z; links],
            (None, Some(f)) => f.time_shares(),
            (None, None) => vec![1.0; links],
        };
        let channels = match &layout {
            Some(l) => {
                let direct = self.channel_model(0.0)?;
                let cross = self.channel_model(self.channel.cross_offset_db)?;
                (0..l.pairs.len()).map(|k| if k < links { direct.clone() } else { cross.clone() }).collect()
            }
            None => vec![self.channel_model(0.0)?; links],
        };
        let cost = if p.v > 0.0 {
            PowerCost::Quadratic { v: p.v }
        } else {
            PowerCost::Zero
        };
        let s = &self.solver;
        let spec = ProblemSpec {
            mode: p.mode,
            power_control: p.power_control,
            scheduling: p.scheduling,
            p_fixed: p.p_fixed,
            time_shares,
            utilities: vec![p.utility.clone(); flows.len()],
            cost,
            network,
            conflicts,
            family,
            flows,
            channels,
            layout,
            grid,
            mc: McConfig {
                paths: self.mc.paths,
                seed: self.mc.seed,
                quad_substeps: self.mc.quad_substeps,
            },
            solver: SolverConfig {
                step_scale: s.step_scale,
                tol: s.tol,
                window: s.window,
                max_iters: s.max_iters,
                init: InitialMultipliers {
                    mu: s.init_mu,
                    ell: s.init_l,
                    nu: s.init_nu,
                },
                trace_stride: s.trace_stride,
                restarts: s.restarts,
                refresh_tol: s.refresh_tol,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn shift(f: CoefficientFn, by: f64) -> CoefficientFn {
    match f {
        CoefficientFn::Constant { value } => CoefficientFn::Constant { value: value + by },
        CoefficientFn::PiecewiseConstant { breakpoints, values } => CoefficientFn::PiecewiseConstant {
            breakpoints,
            values: values.into_iter().map(|v| v + by).collect(),
        },
        CoefficientFn::DampedOscillation {
            base,
            amplitude,
            decay,
            frequency,
            origin,
            length,
        } => {
            // keep the oscillation's absolute swing while moving its level
            let nb = base + by;
            CoefficientFn::DampedOscillation {
                base: nb,
                amplitude: amplitude * base / nb,
                decay,
                frequency,
                origin,
                length,
            }
        }
        CoefficientFn::Sinusoid {
            offset,
            amplitude,
            frequency,
            origin,
            length,
        } => CoefficientFn::Sinusoid {
            offset: offset + by,
            amplitude,
            frequency,
            origin,
            length,
        },
    }
}
