//! Dual subgradient solver for the orthogonal (P2) and shared-medium (P1)
//! problems, with Monte Carlo estimates of the expected time integrals.

mod bank;
mod dual;
mod estimate;
mod multipliers;
mod primal;
mod report;
mod spec;
mod subgradient;

pub use bank::ChannelBank;
pub use dual::{solve_dual, DualTrace, FinalEstimates, RunOutcome, Status, TraceEntry};
pub use estimate::{deterministic_controls, estimate_expectations, flow_rate, DeterministicControls, ExpectationEstimates};
pub use multipliers::{converged, step_size, update_multipliers, Multipliers};
pub use primal::{
    max_min_fair, primal_candidate, recheck_feasibility, recover_primal_from, shortest_route, FeasibilityReport,
    PrimalCandidate, PrimalRecovery,
};
pub use report::{
    multiplier_ids, summed_utility, write_links_csv, write_rate_profiles_csv, write_rates_csv, write_trace_csv,
    RunReport,
};
pub use spec::{ChannelModel, InitialMultipliers, McConfig, Mode, ProblemSpec, SolverConfig};
pub use subgradient::subgradients;

/// Primal controls of a finished run.
pub fn recover_primal(trace: &DualTrace, spec: &ProblemSpec) -> PrimalRecovery {
    recover_primal_from(spec, &trace.routing_sum, trace.iterations, &trace.final_multipliers)
}
