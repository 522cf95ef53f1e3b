//! Closed-form analytics: maximum update counts, the NWAoI lower bound, the
//! bound-attaining uniform schedule and the speed that suffices to fly it.
//!
//! The uniform schedule updates node `m` every `tau / (n_bar_m + 1)` seconds,
//! which is optimal when the UAV speed is unconstrained. Whether the merged
//! schedule is flyable at finite speed depends on consecutive legs, which is
//! what [`prop1_upper_bound`] measures.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{self, UpdateTimes};
use crate::qp::SchedulePolicy;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("nodes {first} and {second} share an update instant in the uniform schedule")]
    DivisorCondition { first: usize, second: usize },
}

/// Most updates node `node` can afford when every one is received overhead.
pub fn max_updates(s: &Scenario, node: usize) -> usize {
    let h2 = s.uav().altitude * s.uav().altitude;
    let ratio = physics::energy_budget_constant(s, node, 0) / h2;
    let mut n = crate::math::floor(ratio).max(0.0) as usize;
    // keep in lockstep with the sign of the budget constant
    while n > 0 && physics::energy_budget_constant(s, node, n) < 0.0 {
        n -= 1;
    }
    while physics::energy_budget_constant(s, node, n + 1) >= 0.0 {
        n += 1;
    }
    n
}

pub fn max_update_counts(s: &Scenario) -> Vec<usize> {
    (0..s.num_nodes()).map(|m| max_updates(s, m)).collect()
}

/// `sum_m w_m / (n_bar_m + 1)`.
pub fn lower_bound(s: &Scenario) -> f64 {
    s.nodes()
        .iter()
        .enumerate()
        .map(|(m, node)| node.weight / (max_updates(s, m) + 1) as f64)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledUpdate {
    pub time: f64,
    pub node: usize,
    /// 1-based index of this update among the node's own updates.
    pub index: usize,
}

/// Merged uniform schedule between the UAV endpoints (which sit at `t = 0`
/// and `t = tau` and are not listed in `updates`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSchedule {
    pub updates: Vec<ScheduledUpdate>,
    pub horizon: f64,
}

impl UniformSchedule {
    pub fn policy(&self) -> SchedulePolicy {
        SchedulePolicy::new(self.updates.iter().map(|u| u.node).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.updates.iter().map(|u| u.time).collect()
    }

    /// Legs flown, counting the initial and final ones.
    pub fn leg_count(&self) -> usize {
        self.updates.len() + 1
    }

    pub fn per_node_times(&self, num_nodes: usize) -> UpdateTimes {
        let mut t = UpdateTimes::empty(num_nodes);
        for u in &self.updates {
            t.per_node[u.node].push(u.time);
        }
        t
    }
}

/// Every node `m` updates at `i tau / (n_bar_m + 1)`, `i = 1..=n_bar_m`.
/// Ties are ordered by node index.
pub fn uniform_schedule(s: &Scenario) -> UniformSchedule {
    let tau = s.horizon();
    let n_bar = max_update_counts(s);
    let mut updates: Vec<(usize, usize, usize)> = Vec::new(); // (node, i, n_bar + 1)
    for (m, &n) in n_bar.iter().enumerate() {
        updates.extend((1..=n).map(|i| (m, i, n + 1)));
    }
    // compare i/a with j/b exactly
    updates.sort_by(|&(m1, i, a), &(m2, j, b)| {
        let lhs = i as u128 * b as u128;
        let rhs = j as u128 * a as u128;
        lhs.cmp(&rhs).then(m1.cmp(&m2)).then(Ordering::Equal)
    });
    UniformSchedule {
        updates: updates
            .into_iter()
            .map(|(node, index, denom)| ScheduledUpdate { time: index as f64 * tau / denom as f64, node, index })
            .collect(),
        horizon: tau,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorCheck {
    pub ok: bool,
    /// First pair of nodes whose uniform updates collide.
    pub offending: Option<(usize, usize)>,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// True iff no two nodes ever update at the same instant in the uniform
/// schedule, i.e. `gcd(n_bar_m + 1, n_bar_p + 1) = 1` for every pair of nodes
/// that update at all. This covers the divisibility case (`2 | 4`) as well
/// as shared factors such as `4` and `6`, which collide at `tau / 2`.
pub fn divisor_condition(s: &Scenario) -> DivisorCheck {
    let n_bar = max_update_counts(s);
    for m in 0..n_bar.len() {
        for p in (m + 1)..n_bar.len() {
            if n_bar[m] == 0 || n_bar[p] == 0 {
                continue;
            }
            if gcd(n_bar[m] + 1, n_bar[p] + 1) > 1 {
                return DivisorCheck { ok: false, offending: Some((m, p)) };
            }
        }
    }
    DivisorCheck { ok: true, offending: None }
}

/// Per-axis speed that suffices to fly the uniform schedule with every update
/// received directly above its node: the steepest of all legs, including the
/// legs from the initial location and to the final location.
pub fn prop1_upper_bound(s: &Scenario) -> Result<f64, BoundsError> {
    let check = divisor_condition(s);
    if let Some((first, second)) = check.offending {
        return Err(BoundsError::DivisorCondition { first, second });
    }
    let schedule = uniform_schedule(s);
    let uav = s.uav();
    let mut points: Vec<(f64, [f64; 2])> = Vec::with_capacity(schedule.updates.len() + 2);
    points.push((0.0, uav.initial));
    points.extend(schedule.updates.iter().map(|u| (u.time, s.node(u.node).location)));
    points.push((s.horizon(), uav.final_location));
    let v = points
        .windows(2)
        .map(|w| {
            let dt = w[1].0 - w[0].0;
            let dx = (w[1].1[0] - w[0].1[0]).abs();
            let dy = (w[1].1[1] - w[0].1[1]).abs();
            dx.max(dy) / dt
        })
        .fold(0.0, f64::max);
    Ok(v)
}

/// Weights proportional to `n_bar_m + 1`, which equalize every node's share of
/// the lower bound.
pub fn weight_guidance(s: &Scenario) -> Vec<f64> {
    let n_bar = max_update_counts(s);
    let total: usize = n_bar.iter().map(|n| n + 1).sum();
    n_bar.iter().map(|&n| (n + 1) as f64 / total as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_bar: Vec<usize>,
    pub g_min: f64,
    pub uniform_times: Vec<ScheduledUpdate>,
    pub divisor_ok: bool,
    pub offending_pair: Option<(usize, usize)>,
    pub v_bar_min: Option<f64>,
    pub weight_guidance: Vec<f64>,
}

pub fn bound_report(s: &Scenario) -> BoundReport {
    let check = divisor_condition(s);
    BoundReport {
        n_bar: max_update_counts(s),
        g_min: lower_bound(s),
        uniform_times: uniform_schedule(s).updates,
        divisor_ok: check.ok,
        offending_pair: check.offending,
        v_bar_min: prop1_upper_bound(s).ok(),
        weight_guidance: weight_guidance(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ChannelParams, Node, UavParams};
    use alloc::vec;

    /// Battery that buys exactly `k` overhead updates plus a fraction.
    fn battery_for(k: f64) -> f64 {
        k * 6.5472e-4
    }

    fn scenario(nodes: Vec<Node>, initial: [f64; 2], final_location: [f64; 2]) -> Scenario {
        Scenario::new(1000.0, nodes, ChannelParams::default(), UavParams::new(initial, final_location, 25.0, 900.0))
            .unwrap()
    }

    fn two_nodes(n1: f64, n2: f64) -> Scenario {
        scenario(
            vec![
                Node::new(0, [0.0, 0.0], battery_for(n1), 0.5),
                Node::new(1, [300.0, 0.0], battery_for(n2), 0.5),
            ],
            [0.0, 0.0],
            [300.0, 0.0],
        )
    }

    #[test]
    fn max_updates_examples() {
        let s = scenario(vec![Node::new(0, [0.0, 0.0], 1.0, 1.0)], [0.0; 2], [0.0; 2]);
        assert_eq!(max_updates(&s, 0), 1527);
        let poor = scenario(vec![Node::new(0, [0.0, 0.0], 6e-4, 1.0)], [0.0; 2], [0.0; 2]);
        assert_eq!(max_updates(&poor, 0), 0);
    }

    #[test]
    fn beta0_for_twelve_updates() {
        let with = |beta0: f64| {
            let channel = ChannelParams { beta0, ..ChannelParams::default() };
            scenario(vec![Node::new(0, [0.0, 0.0], 1.0, 1.0)], [0.0; 2], [0.0; 2]).with_channel(channel).unwrap()
        };
        // 7.8566e-6 sits just below the threshold 12 * 6400 * 1.023e-10
        assert_eq!(max_updates(&with(7.8566e-6), 0), 11);
        assert_eq!(max_updates(&with(7.8567e-6), 0), 12);
        assert_eq!(max_updates(&with(8.184e-6), 0), 12);
    }

    #[test]
    fn lower_bound_examples() {
        let s = scenario(vec![Node::new(0, [0.0, 0.0], battery_for(1.5), 1.0)], [0.0; 2], [0.0; 2]);
        assert_eq!(lower_bound(&s), 0.5);
        let s = two_nodes(1.5, 3.5);
        assert!((lower_bound(&s) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn uniform_schedule_examples() {
        let one = scenario(vec![Node::new(0, [0.0, 0.0], battery_for(2.5), 1.0)], [0.0; 2], [0.0; 2]);
        assert_eq!(uniform_schedule(&one).times(), vec![300.0, 600.0]);

        let s = two_nodes(1.5, 2.5);
        let u = uniform_schedule(&s);
        let merged: Vec<(f64, usize)> = u.updates.iter().map(|x| (x.time, x.node)).collect();
        assert_eq!(merged, vec![(300.0, 1), (450.0, 0), (600.0, 1)]);
        assert_eq!(u.leg_count(), 4);
        let g = physics::nwaoi(&s, &u.per_node_times(2));
        assert!((g - lower_bound(&s)).abs() < 1e-15);
    }

    #[test]
    fn divisor_examples() {
        assert!(divisor_condition(&two_nodes(1.5, 2.5)).ok);
        let c = divisor_condition(&two_nodes(1.5, 3.5));
        assert!(!c.ok);
        assert_eq!(c.offending, Some((0, 1)));
        assert!(!divisor_condition(&two_nodes(2.5, 2.5)).ok);
        // 4 and 6 share the instant tau/2 although neither divides the other
        assert!(!divisor_condition(&two_nodes(3.5, 5.5)).ok);
        // nodes that never update cannot collide
        assert!(divisor_condition(&two_nodes(0.5, 3.5)).ok);
    }

    #[test]
    fn prop1_worked_example() {
        let s = two_nodes(1.5, 2.5);
        assert_eq!(prop1_upper_bound(&s).unwrap(), 2.0);
        assert!(matches!(prop1_upper_bound(&two_nodes(1.5, 3.5)), Err(BoundsError::DivisorCondition { .. })));
    }

    #[test]
    fn prop1_colocated_is_zero() {
        let s = scenario(
            vec![Node::new(0, [5.0, 5.0], battery_for(1.5), 0.3), Node::new(1, [5.0, 5.0], battery_for(2.5), 0.7)],
            [5.0, 5.0],
            [5.0, 5.0],
        );
        assert_eq!(prop1_upper_bound(&s).unwrap(), 0.0);
    }

    #[test]
    fn weight_guidance_examples() {
        let w = weight_guidance(&two_nodes(1.5, 3.5));
        assert!((w[0] - 2.0 / 6.0).abs() < 1e-15 && (w[1] - 4.0 / 6.0).abs() < 1e-15);
        let one = scenario(vec![Node::new(0, [0.0, 0.0], 1.0, 1.0)], [0.0; 2], [0.0; 2]);
        assert_eq!(weight_guidance(&one), vec![1.0]);
        // reweighted lower-bound terms are all equal to 1 / sum(n_bar + 1)
        let n_bar = max_update_counts(&two_nodes(1.5, 3.5));
        for (wm, n) in w.iter().zip(n_bar) {
            assert!((wm / (n + 1) as f64 - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn report_flags_divisor_violation() {
        let r = bound_report(&two_nodes(1.5, 3.5));
        assert!(!r.divisor_ok);
        assert!(r.v_bar_min.is_none());
        assert!((r.g_min - 0.375).abs() < 1e-15);
        assert_eq!(r.weight_guidance.len(), 2);
    }
}
