//! Per-sample inner maximizations of the Lagrangian, one per layer.

mod concave_max;
mod congestion;
mod nonorth;
mod power;
mod routing;
mod schedule;
mod utility;

pub use congestion::{congestion_optimal_rate, RATE_FLOOR};
pub use nonorth::{nonorthogonal_objective, power_nonorthogonal_heuristic, HeuristicPower};
pub use power::{
    link_weight, power_cap_bound, power_optimal, power_optimal_generic, power_optimal_generic_on,
    power_optimal_quadratic, quadratic_root_clipped, PowerCost, PowerPrices,
};
pub use routing::routing_optimal;
pub use schedule::{schedule_max_weight, MaxWeightSolver, Schedule};
pub use utility::Utility;
