use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ipm::{self, Constraint, IpmOptions, Program};
use super::schedule::{push_difference, Coord};
use super::{SolveError, SolveStatus, FIXED_BUDGET_FRACTION};
use crate::bounds::UniformSchedule;
use crate::physics;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinSpeedSolution {
    /// Smallest per-axis speed (m/s) that realizes the uniform schedule.
    pub v_min: f64,
    pub waypoints: Vec<[f64; 2]>,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Minimum common per-axis speed that lets the UAV collect every update of
/// the uniform schedule at its prescribed time within each node's energy
/// budget.
pub fn solve_min_speed(s: &Scenario, schedule: &UniformSchedule, tol: f64) -> Result<MinSpeedSolution, SolveError> {
    if !(tol > 0.0) {
        return Err(SolveError::Tolerance);
    }
    let updates = &schedule.updates;
    let big_m = s.num_nodes();
    if let Some(bad) = updates.iter().find(|u| u.node >= big_m) {
        return Err(SolveError::UnknownNode { node: bad.node, num_nodes: big_m });
    }
    let tau = s.horizon();
    let mut times = Vec::with_capacity(updates.len() + 2);
    times.push(0.0);
    times.extend(updates.iter().map(|u| u.time));
    times.push(tau);
    for (i, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            // legs are indexed from the initial location; report update indices
            return Err(SolveError::CoincidentTimes { first: i.saturating_sub(1), second: i });
        }
    }

    let scale = s.region();
    let uav = s.uav();
    let h2 = uav.altitude * uav.altitude;
    let mut counts = vec![0usize; big_m];
    for u in updates {
        counts[u.node] += 1;
    }
    let budgets: Vec<f64> = (0..big_m).map(|m| physics::energy_budget_constant(s, m, counts[m])).collect();
    if (0..big_m).any(|m| counts[m] > 0 && budgets[m] < 0.0) {
        return Ok(MinSpeedSolution {
            v_min: f64::INFINITY,
            waypoints: Vec::new(),
            status: SolveStatus::Infeasible,
            kkt_residual: f64::INFINITY,
            iterations: 0,
        });
    }

    let mut next = 0;
    let mut pos = Vec::with_capacity(updates.len() + 2);
    pos.push([Coord::Fixed(uav.initial[0] / scale), Coord::Fixed(uav.initial[1] / scale)]);
    for u in updates {
        let loc = s.node(u.node).location;
        if budgets[u.node] <= FIXED_BUDGET_FRACTION * h2 {
            pos.push([Coord::Fixed(loc[0] / scale), Coord::Fixed(loc[1] / scale)]);
        } else {
            pos.push([Coord::Var(next), Coord::Var(next + 1)]);
            next += 2;
        }
    }
    pos.push([Coord::Fixed(uav.final_location[0] / scale), Coord::Fixed(uav.final_location[1] / scale)]);
    let w = next;
    let mut prog = Program::new(w + 1);
    prog.linear[w] = 1.0;

    for m in 0..big_m {
        if counts[m] == 0 || budgets[m] <= FIXED_BUDGET_FRACTION * h2 {
            continue;
        }
        let loc = s.node(m).location;
        let quad = updates
            .iter()
            .enumerate()
            .filter(|(_, u)| u.node == m)
            .flat_map(|(i, _)| {
                let p = pos[i + 1];
                (0..2).filter_map(move |a| match p[a] {
                    Coord::Var(v) => Some((v, loc[a] / scale)),
                    Coord::Fixed(_) => None,
                })
            })
            .collect();
        prog.constraints.push(Constraint { quad, lin: Vec::new(), constant: -budgets[m] / (scale * scale) });
    }

    for leg in 0..times.len() - 1 {
        let dt = (times[leg + 1] - times[leg]) / tau;
        for axis in 0..2 {
            for sign in [1.0, -1.0] {
                let mut lin = Vec::new();
                let mut constant = 0.0;
                push_difference(&mut lin, &mut constant, pos[leg + 1][axis], pos[leg][axis], sign);
                lin.push((w, -dt));
                prog.constraints.push(Constraint { quad: Vec::new(), lin, constant });
            }
        }
    }

    // start above every node with a speed comfortably above what that needs
    let mut z0 = vec![0.0; w + 1];
    for (i, u) in updates.iter().enumerate() {
        let loc = s.node(u.node).location;
        for a in 0..2 {
            if let Coord::Var(v) = pos[i + 1][a] {
                z0[v] = loc[a] / scale;
            }
        }
    }
    let coord = |c: Coord, z: &[f64]| match c {
        Coord::Var(i) => z[i],
        Coord::Fixed(v) => v,
    };
    let mut need: f64 = 0.0;
    for leg in 0..times.len() - 1 {
        let dt = (times[leg + 1] - times[leg]) / tau;
        for a in 0..2 {
            need = need.max((coord(pos[leg + 1][a], &z0) - coord(pos[leg][a], &z0)).abs() / dt);
        }
    }
    z0[w] = 1.5 * need + 1.0;

    let opts = IpmOptions { gap_tol: (tol * 1e-2).max(1e-12), ..IpmOptions::default() };
    let out = ipm::solve(&prog, z0, &opts, None);
    let kkt = prog.kkt_residual(&out.z, &out.duals);
    let waypoints = (1..=updates.len())
        .map(|i| [coord(pos[i][0], &out.z) * scale, coord(pos[i][1], &out.z) * scale])
        .collect();
    Ok(MinSpeedSolution {
        v_min: out.z[w] * scale / tau,
        waypoints,
        status: if kkt <= tol { SolveStatus::Optimal } else { SolveStatus::MaxIterations },
        kkt_residual: kkt,
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use crate::scenario::{ChannelParams, Node, UavParams};
    use alloc::vec;

    const E1: f64 = 6.5472e-4;

    fn build(nodes: Vec<Node>, initial: [f64; 2], final_location: [f64; 2]) -> Scenario {
        Scenario::new(1000.0, nodes, ChannelParams::default(), UavParams::new(initial, final_location, 25.0, 900.0))
            .unwrap()
    }

    #[test]
    fn colocated_needs_no_speed() {
        let s = build(vec![Node::new(0, [0.0, 0.0], 2.5 * E1, 1.0)], [0.0; 2], [0.0; 2]);
        let sol = solve_min_speed(&s, &bounds::uniform_schedule(&s), 1e-6).unwrap();
        assert!(sol.v_min.abs() < 1e-6, "{sol:?}");
    }

    #[test]
    fn worked_example_within_bound() {
        let s = build(
            vec![Node::new(0, [0.0, 0.0], 1.5 * E1, 0.5), Node::new(1, [300.0, 0.0], 2.5 * E1, 0.5)],
            [0.0, 0.0],
            [300.0, 0.0],
        );
        let sol = solve_min_speed(&s, &bounds::uniform_schedule(&s), 1e-6).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{sol:?}");
        assert!(sol.v_min <= 2.0 + 1e-6);
        assert!(sol.v_min > 0.0);
        assert_eq!(sol.waypoints.len(), 3);
    }

    #[test]
    fn coincident_times_rejected() {
        let s = build(
            vec![Node::new(0, [0.0, 0.0], 1.5 * E1, 0.5), Node::new(1, [300.0, 0.0], 3.5 * E1, 0.5)],
            [0.0, 0.0],
            [300.0, 0.0],
        );
        let err = solve_min_speed(&s, &bounds::uniform_schedule(&s), 1e-6).unwrap_err();
        assert!(matches!(err, SolveError::CoincidentTimes { .. }));
    }
}
