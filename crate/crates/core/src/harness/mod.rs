//! Config files and the experiment operations of the command-line runner.

pub mod config;
pub mod ops;
pub mod svg;

pub use config::{CoefSpec, RunConfig, ShapeSpec, OUTPUT_DIR_ENV};
pub use ops::{
    oracle_small_instance, run, run_into, run_time_varying_beta, run_time_varying_utilities, sweep_delta, sweep_n,
    sweep_t, verify_convex_order, BetaComparison, BetaSchedule, ConvexOrderReport, DeltaSweep, NSweep,
    OracleReport, RateCurves, RunArtifacts, StepRule, TSweep, Verdict,
};
