//! Channel, energy and age-of-information arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

/// Per-node update instants, each vector sorted ascending within `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateTimes {
    pub per_node: Vec<Vec<f64>>,
}

impl UpdateTimes {
    pub fn empty(num_nodes: usize) -> Self {
        UpdateTimes { per_node: vec![Vec::new(); num_nodes] }
    }

    pub fn total_updates(&self) -> usize {
        self.per_node.iter().map(Vec::len).sum()
    }

    /// Checks ordering and the horizon bound.
    pub fn is_valid(&self, horizon: f64) -> bool {
        self.per_node.iter().all(|t| {
            t.windows(2).all(|w| w[0] <= w[1]) && t.iter().all(|&v| (0.0..=horizon).contains(&v))
        })
    }
}

/// Per-node UAV positions at each update, aligned with [`UpdateTimes`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateLocations {
    pub per_node: Vec<Vec<[f64; 2]>>,
}

fn squared_distance(s: &Scenario, uav_xy: [f64; 2], node: usize) -> f64 {
    let h = s.uav().altitude;
    let [nx, ny] = s.node(node).location;
    let dx = uav_xy[0] - nx;
    let dy = uav_xy[1] - ny;
    h * h + dx * dx + dy * dy
}

/// Line-of-sight power gain `beta0 / (h^2 + |uav - node|^2)`.
pub fn channel_gain(s: &Scenario, uav_xy: [f64; 2], node: usize) -> f64 {
    s.channel().beta0 / squared_distance(s, uav_xy, node)
}

/// Joules a node spends to deliver one update to a UAV hovering over `uav_xy`.
pub fn update_energy(s: &Scenario, uav_xy: [f64; 2], node: usize) -> f64 {
    s.channel().energy_per_square_meter() * squared_distance(s, uav_xy, node)
}

/// Squared horizontal distance budget left to node `node` after `n_updates`
/// overhead updates. Negative when the battery cannot pay for them at all.
pub fn energy_budget_constant(s: &Scenario, node: usize, n_updates: usize) -> f64 {
    let h = s.uav().altitude;
    s.node(node).battery / s.channel().energy_per_square_meter() - n_updates as f64 * h * h
}

/// Normalized weighted AoI: `(1/tau^2) sum_m w_m sum_i (t_i - t_{i-1})^2`
/// with `t_0 = 0` and a closing gap to the horizon. No updates at all gives 1.
pub fn nwaoi(s: &Scenario, times: &UpdateTimes) -> f64 {
    if times.total_updates() == 0 {
        return 1.0;
    }
    let tau = s.horizon();
    let mut total = 0.0;
    for (m, node_times) in times.per_node.iter().enumerate() {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for &t in node_times.iter().chain(core::iter::once(&tau)) {
            let gap = (t - prev) / tau;
            acc += gap * gap;
            prev = t;
        }
        total += s.node(m).weight * acc;
    }
    total
}

/// Sampled AoI curves. `values[m][k]` is node `m`'s AoI at `t[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiTrace {
    pub t: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl AoiTrace {
    /// Trapezoid integral of node `m`'s trace over the horizon.
    pub fn integral(&self, m: usize) -> f64 {
        self.t
            .windows(2)
            .zip(self.values[m].windows(2))
            .map(|(t, a)| 0.5 * (t[1] - t[0]) * (a[0] + a[1]))
            .sum()
    }
}

/// Samples every node's sawtooth AoI on a uniform grid of `grid` points.
///
/// Each update instant is also emitted twice (left limit, then the reset
/// value) so the trace is exactly piecewise linear between samples.
pub fn aoi_trace(s: &Scenario, times: &UpdateTimes, grid: usize) -> AoiTrace {
    let grid = grid.max(2);
    let tau = s.horizon();
    // (time, is_left_limit)
    let mut samples: Vec<(f64, bool)> =
        (0..grid).map(|k| (tau * k as f64 / (grid - 1) as f64, false)).collect();
    for node_times in &times.per_node {
        for &t in node_times {
            samples.push((t, true));
            samples.push((t, false));
        }
    }
    // left limits sort before the value at the same instant
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    samples.dedup();

    let values = times
        .per_node
        .iter()
        .enumerate()
        .map(|(m, node_times)| {
            let floor = s.node(m).aoi_floor;
            samples
                .iter()
                .map(|&(t, left)| {
                    let last = node_times
                        .iter()
                        .copied()
                        .filter(|&u| if left { u < t } else { u <= t })
                        .fold(0.0, f64::max);
                    (t - last) + floor
                })
                .collect()
        })
        .collect();
    AoiTrace { t: samples.into_iter().map(|(t, _)| t).collect(), values }
}
