//! Convex trajectory programs on a shared interior-point kernel.
//!
//! Both programs are solved in scaled units: times are divided by the
//! horizon and coordinates by the scenario's region side. Results are
//! reported in seconds and meters.

mod ipm;
mod min_speed;
mod schedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use min_speed::{solve_min_speed, MinSpeedSolution};
pub use schedule::{
    build_time_quadratic, solve_schedule, solve_schedule_default, Multipliers, SchedulePolicy, TimeQuadratic,
    TrajectorySolution,
};

/// KKT tolerance in scaled units.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Nodes whose remaining squared-distance budget is at most this fraction of
/// `h^2` have their waypoints pinned directly above them.
const FIXED_BUDGET_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("tolerance must be positive")]
    Tolerance,
    #[error("schedule references node {node} but the scenario has {num_nodes} nodes")]
    UnknownNode { node: usize, num_nodes: usize },
    #[error("updates {first} and {second} of the merged schedule share the same time instant")]
    CoincidentTimes { first: usize, second: usize },
}
