use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use stochnum::harness::{
    oracle_small_instance, run, run_time_varying_beta, run_time_varying_utilities, sweep_delta, sweep_n, sweep_t,
    verify_convex_order, BetaSchedule, CoefSpec, RunConfig, ShapeSpec, StepRule, Verdict, OUTPUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "stochnum", version, about = "Cross-layer utility maximization over stochastic fading channels")]
struct Cli {
    /// Output directory; overrides the config and the environment.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Run { config: PathBuf },
    /// Solve the instance for several noise levels.
    SweepDelta {
        config: PathBuf,
        /// Comma-separated deltas; `tv` stands for 15 sin(10 pi t / T) + 35.
        #[arg(long, value_delimiter = ',', default_value = "0,5,20,50")]
        deltas: Vec<String>,
        /// Share the random streams across runs.
        #[arg(long)]
        crn: bool,
    },
    /// Channel-level convex order check.
    VerifyConvexOrder {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,5,20,25,50")]
        deltas: Vec<f64>,
        /// Number of paths; defaults to the config's `mc.M`.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Compare the dual solver with a brute-force primal optimum.
    Oracle { config: PathBuf },
    /// Iterations and rates for several horizons.
    #[command(name = "sweep-T")]
    SweepT {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        ts: Vec<f64>,
        #[arg(long, value_enum, default_value_t = NRule::Proportional)]
        n_rule: NRule,
    },
    /// Iterations for several discretization sizes.
    SweepN {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,500,2000")]
        ns: Vec<usize>,
    },
    /// Source-rate curves under a time-divided utility.
    TvUtilities { config: PathBuf },
    /// Compare piecewise-constant beta schedules over thirds of the horizon.
    TvBeta {
        config: PathBuf,
        /// Semicolon-separated schedules of comma-separated values.
        #[arg(long, default_value = "500,100,10;10,100,500")]
        schedules: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NRule {
    Fixed,
    Proportional,
}

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn parse_delta(s: &str) -> Result<CoefSpec> {
    if s.trim() == "tv" {
        return Ok(CoefSpec::Shape(ShapeSpec::Sinusoid {
            offset: 35.0,
            amplitude: 15.0,
            frequency: 10.0 * std::f64::consts::PI,
            origin: None,
            length: None,
        }));
    }
    let v: f64 = s.trim().parse().with_context(|| format!("bad delta `{s}`"))?;
    Ok(CoefSpec::Value(v))
}

fn print_verdicts(verdicts: &[Verdict]) {
    for v in verdicts {
        println!("{v}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let dir = |cfg: &RunConfig| cli.out.clone().unwrap_or_else(|| cfg.output_dir());
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load(config)?;
            cfg.outputs.directory = dir(&cfg);
            let out = run(&cfg)?;
            let r = &out.report;
            println!(
                "{:?} after {} iterations; dual {:.6} ± {:.3e}; summed utility {:.6}; mean link power {:.4} W",
                r.status, r.iterations, r.dual, r.dual_se, r.summed_utility, r.mean_link_power
            );
            for (f, rate) in r.rates.iter().enumerate() {
                println!("flow {f}: {rate:.6}");
            }
            println!("wrote {}", cfg.outputs.directory.display());
            return Ok(if r.converged { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::SweepDelta { config, deltas, crn } => {
            let cfg = load(config)?;
            let deltas = deltas.iter().map(|s| parse_delta(s)).collect::<Result<Vec<_>>>()?;
            let sweep = sweep_delta(&cfg, &deltas, *crn, &dir(&cfg))?;
            for e in &sweep.entries {
                let r = &e.report;
                println!(
                    "delta {}: utility {:.6} ± {:.3e}, mean link power {:.4} W, {} iterations",
                    e.label, r.summed_utility, r.summed_utility_se, r.mean_link_power, r.iterations
                );
            }
            print_verdicts(&sweep.verdicts);
        }
        Command::VerifyConvexOrder { config, deltas, paths } => {
            let cfg = load(config)?;
            let report = verify_convex_order(&cfg, deltas, paths.unwrap_or(cfg.mc.paths), &dir(&cfg))?;
            for r in &report.rows {
                println!(
                    "delta {}: E[X(T)] {:.6} ± {:.3e}, E[int C] {:.6} ± {:.3e}",
                    r.delta, r.mean_x_end, r.se_x_end, r.mean_capacity, r.se_capacity
                );
            }
            print_verdicts(&report.verdicts);
        }
        Command::Oracle { config } => {
            let cfg = load(config)?;
            let r = oracle_small_instance(&cfg, &dir(&cfg))?;
            println!(
                "primal* {:.6} (rate {:.6}), dual {:.6} ± {:.3e} (rate {:.6}), gap {:.3}%",
                r.primal_star,
                r.lambda_star,
                r.dual,
                r.dual_se,
                r.solver_rate,
                100.0 * r.gap
            );
        }
        Command::SweepT { config, ts, n_rule } => {
            let cfg = load(config)?;
            let rule = match n_rule {
                NRule::Fixed => StepRule::Fixed,
                NRule::Proportional => StepRule::Proportional,
            };
            let sweep = sweep_t(&cfg, ts, rule, &dir(&cfg))?;
            for r in &sweep.rows {
                println!("T {}: n {}, {} iterations, summed utility {:.6}", r.t_end, r.n, r.report.iterations, r.report.summed_utility);
            }
            print_verdicts(&sweep.verdicts);
        }
        Command::SweepN { config, ns } => {
            let cfg = load(config)?;
            let sweep = sweep_n(&cfg, ns, &dir(&cfg))?;
            for r in &sweep.rows {
                println!("n {}: {} / {} iterations", r.n, r.iterations_invariant, r.iterations_varying);
            }
            print_verdicts(&sweep.verdicts);
        }
        Command::TvUtilities { config } => {
            let cfg = load(config)?;
            let curves = run_time_varying_utilities(&cfg, &dir(&cfg))?;
            for (f, c) in curves.curves.iter().enumerate() {
                let last = c.last().copied().unwrap_or(f64::NAN);
                println!("flow {f}: mu {:.6}, rate {:.6} -> {last:.6}", curves.mu[f], c[0]);
            }
            print_verdicts(&curves.verdicts);
        }
        Command::TvBeta { config, schedules } => {
            let cfg = load(config)?;
            let mut parsed = Vec::new();
            for s in schedules.split(';') {
                let values = s
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad beta `{v}`")))
                    .collect::<Result<Vec<_>>>()?;
                parsed.push(BetaSchedule::new(s.trim(), values));
            }
            if parsed.len() < 2 {
                bail!("need at least two schedules");
            }
            let cmp = run_time_varying_beta(&cfg, &parsed, &dir(&cfg))?;
            for r in &cmp.rows {
                println!("beta {}: summed utility {:.6}", r.label, r.report.summed_utility);
            }
            print_verdicts(&cmp.verdicts);
        }
    }
    Ok(ExitCode::SUCCESS)
}
