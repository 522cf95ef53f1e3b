use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ipm::{self, Constraint, IpmOptions, PhaseOne, Program};
use super::{SolveError, SolveStatus, DEFAULT_TOL, FIXED_BUDGET_FRACTION};
use crate::physics::{self, UpdateLocations, UpdateTimes};
use crate::scenario::Scenario;

/// Ordered node indices (zero-based); entry `i` is the node served by the
/// `i`-th update of the mission.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SchedulePolicy(pub Vec<usize>);

impl SchedulePolicy {
    pub fn new(order: Vec<usize>) -> Self {
        SchedulePolicy(order)
    }

    pub fn empty() -> Self {
        SchedulePolicy(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn push(&mut self, node: usize) {
        self.0.push(node);
    }

    /// Number of updates scheduled for each of `num_nodes` nodes.
    pub fn counts(&self, num_nodes: usize) -> Vec<usize> {
        let mut counts = vec![0; num_nodes];
        for &m in &self.0 {
            counts[m] += 1;
        }
        counts
    }

    /// Global update positions belonging to node `m`, ascending.
    pub fn positions_of(&self, m: usize) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &n)| n == m).map(|(i, _)| i).collect()
    }
}

/// The quadratic form of one node's squared inter-update gaps.
///
/// With unit horizon, `t' Q t + 1 - 2 t_last` equals the sum of squared gaps
/// (including the gap from 0 and the gap to the horizon).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeQuadratic {
    pub node: usize,
    /// Global positions of this node's updates in the schedule.
    pub positions: Vec<usize>,
    /// Dense row-major `n_m x n_m` tridiagonal matrix.
    pub matrix: Vec<f64>,
}

impl TimeQuadratic {
    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim() + j]
    }

    /// `t' Q t` for this node's times.
    pub fn quadratic(&self, t: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += t[i] * self.get(i, j) * t[j];
            }
        }
        acc
    }
}

/// Builds the per-node tridiagonal gap matrices (2 on the diagonal, -1 off it).
pub fn build_time_quadratic(u: &SchedulePolicy, num_nodes: usize) -> Vec<TimeQuadratic> {
    (0..num_nodes)
        .map(|m| {
            let positions = u.positions_of(m);
            let n = positions.len();
            let mut matrix = vec![0.0; n * n];
            for i in 0..n {
                matrix[i * n + i] = 2.0;
                if i + 1 < n {
                    matrix[i * n + i + 1] = -1.0;
                    matrix[(i + 1) * n + i] = -1.0;
                }
            }
            TimeQuadratic { node: m, positions, matrix }
        })
        .collect()
}

/// Lagrange multipliers of the scaled program (times divided by the horizon,
/// coordinates by the region side).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Multipliers {
    /// Per node; zero for nodes without updates or with pinned waypoints.
    pub energy: Vec<f64>,
    /// Per leg `i` (waypoint `i` to `i+1`): `[+dx, -dx]` constraint duals.
    pub speed_x: Vec<[f64; 2]>,
    pub speed_y: Vec<[f64; 2]>,
    /// Per leg: dual of `t_i <= t_{i+1}`.
    pub ordering: Vec<f64>,
}

/// Optimal update times and waypoints for one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySolution {
    pub policy: SchedulePolicy,
    /// Update instants in seconds, nondecreasing.
    pub times: Vec<f64>,
    /// UAV position at each update in meters.
    pub waypoints: Vec<[f64; 2]>,
    /// NWAoI of the returned times; 1 for the empty schedule, infinite when infeasible.
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Indices `i` with `t_i` and `t_{i+1}` equal up to 1e-6 of the horizon.
    pub coincident: Vec<usize>,
    pub multipliers: Multipliers,
}

impl TrajectorySolution {
    fn infeasible(policy: SchedulePolicy, status: SolveStatus) -> Self {
        TrajectorySolution {
            policy,
            times: Vec::new(),
            waypoints: Vec::new(),
            objective: f64::INFINITY,
            status,
            kkt_residual: f64::INFINITY,
            iterations: 0,
            coincident: Vec::new(),
            multipliers: Multipliers::default(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Splits the merged times back into per-node vectors.
    pub fn per_node_times(&self, num_nodes: usize) -> UpdateTimes {
        let mut per_node = vec![Vec::new(); num_nodes];
        for (&m, &t) in self.policy.order().iter().zip(&self.times) {
            per_node[m].push(t);
        }
        UpdateTimes { per_node }
    }

    pub fn per_node_locations(&self, num_nodes: usize) -> UpdateLocations {
        let mut per_node = vec![Vec::new(); num_nodes];
        for (&m, &p) in self.policy.order().iter().zip(&self.waypoints) {
            per_node[m].push(p);
        }
        UpdateLocations { per_node }
    }

    /// Joules spent by each update's node.
    pub fn update_energies(&self, s: &Scenario) -> Vec<f64> {
        self.policy
            .order()
            .iter()
            .zip(&self.waypoints)
            .map(|(&m, &p)| physics::update_energy(s, p, m))
            .collect()
    }

    /// `(t, x, y)` rows including both endpoints: `n + 2` rows.
    pub fn trajectory_table(&self, s: &Scenario) -> Vec<[f64; 3]> {
        let uav = s.uav();
        let mut rows = Vec::with_capacity(self.times.len() + 2);
        rows.push([0.0, uav.initial[0], uav.initial[1]]);
        for (&t, p) in self.times.iter().zip(&self.waypoints) {
            rows.push([t, p[0], p[1]]);
        }
        rows.push([s.horizon(), uav.final_location[0], uav.final_location[1]]);
        rows
    }

    /// Constant-velocity segments between consecutive rows of the trajectory
    /// table. Zero-length segments report zero velocity.
    pub fn velocity_profile(&self, s: &Scenario) -> Vec<[f64; 2]> {
        self.trajectory_table(s)
            .windows(2)
            .map(|w| {
                let dt = w[1][0] - w[0][0];
                if dt > 0.0 {
                    [(w[1][1] - w[0][1]) / dt, (w[1][2] - w[0][2]) / dt]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect()
    }
}

/// Affine expression `sum a_i z_i + constant`.
#[derive(Debug, Clone, Copy)]
pub(super) enum Coord {
    Var(usize),
    Fixed(f64),
}

pub(super) fn push_difference(
    lin: &mut Vec<(usize, f64)>,
    constant: &mut f64,
    to: Coord,
    from: Coord,
    sign: f64,
) {
    match to {
        Coord::Var(i) => lin.push((i, sign)),
        Coord::Fixed(v) => *constant += sign * v,
    }
    match from {
        Coord::Var(i) => lin.push((i, -sign)),
        Coord::Fixed(v) => *constant -= sign * v,
    }
}

/// Where each constraint of a built program sits.
struct Layout {
    n: usize,
    times: Vec<Coord>,
    pos: Vec<[Coord; 2]>,
    energy: Vec<Option<usize>>,
    speed: Vec<[Option<[usize; 2]>; 2]>,
    ordering: Vec<usize>,
}

fn build_program(s: &Scenario, u: &SchedulePolicy, budgets: &[f64]) -> (Program, Layout, Vec<f64>) {
    let n = u.len();
    let big_m = s.num_nodes();
    let scale = s.region();
    let tau = s.horizon();
    let uav = s.uav();
    let h2 = uav.altitude * uav.altitude;

    // variables: n times, then (x, y) for every free waypoint
    let mut next = n;
    let mut pos = Vec::with_capacity(n + 2);
    pos.push([Coord::Fixed(uav.initial[0] / scale), Coord::Fixed(uav.initial[1] / scale)]);
    for &m in u.order() {
        let loc = s.node(m).location;
        if budgets[m] <= FIXED_BUDGET_FRACTION * h2 {
            pos.push([Coord::Fixed(loc[0] / scale), Coord::Fixed(loc[1] / scale)]);
        } else {
            pos.push([Coord::Var(next), Coord::Var(next + 1)]);
            next += 2;
        }
    }
    pos.push([Coord::Fixed(uav.final_location[0] / scale), Coord::Fixed(uav.final_location[1] / scale)]);
    let num_vars = next;

    let mut times = Vec::with_capacity(n + 2);
    times.push(Coord::Fixed(0.0));
    times.extend((0..n).map(Coord::Var));
    times.push(Coord::Fixed(1.0));

    let mut prog = Program::new(num_vars);
    for q in build_time_quadratic(u, big_m) {
        let lambda = s.node(q.node).weight;
        let k = q.dim();
        if k == 0 {
            prog.constant += lambda;
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                let v = q.get(i, j);
                if v != 0.0 {
                    prog.hessian.add(q.positions[i], q.positions[j], 2.0 * lambda * v);
                }
            }
        }
        prog.linear[q.positions[k - 1]] -= 2.0 * lambda;
        prog.constant += lambda;
    }

    let mut energy = vec![None; big_m];
    for m in 0..big_m {
        let positions = u.positions_of(m);
        if positions.is_empty() || budgets[m] <= FIXED_BUDGET_FRACTION * h2 {
            continue;
        }
        let loc = s.node(m).location;
        let mut quad = Vec::with_capacity(2 * positions.len());
        for &i in &positions {
            for axis in 0..2 {
                if let Coord::Var(v) = pos[i + 1][axis] {
                    quad.push((v, loc[axis] / scale));
                }
            }
        }
        energy[m] = Some(prog.constraints.len());
        prog.constraints.push(Constraint { quad, lin: Vec::new(), constant: -budgets[m] / (scale * scale) });
    }

    let kappa = [uav.vmax_x * tau / scale, uav.vmax_y * tau / scale];
    let mut speed = Vec::with_capacity(n + 1);
    let mut ordering = Vec::with_capacity(n + 1);
    for leg in 0..=n {
        let mut per_axis = [None, None];
        for axis in 0..2 {
            if !kappa[axis].is_finite() {
                continue;
            }
            let mut idx = [0; 2];
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                let mut lin = Vec::new();
                let mut constant = 0.0;
                push_difference(&mut lin, &mut constant, pos[leg + 1][axis], pos[leg][axis], sign);
                push_difference(&mut lin, &mut constant, times[leg + 1], times[leg], -kappa[axis]);
                idx[k] = prog.constraints.len();
                prog.constraints.push(Constraint { quad: Vec::new(), lin, constant });
            }
            per_axis[axis] = Some(idx);
        }
        speed.push(per_axis);

        let mut lin = Vec::new();
        let mut constant = 0.0;
        push_difference(&mut lin, &mut constant, times[leg], times[leg + 1], 1.0);
        ordering.push(prog.constraints.len());
        prog.constraints.push(Constraint { quad: Vec::new(), lin, constant });
    }

    // start: uniform times, waypoints on the straight line between endpoints
    let mut z0 = vec![0.0; num_vars];
    for i in 0..n {
        let frac = (i + 1) as f64 / (n + 1) as f64;
        z0[i] = frac;
        for axis in 0..2 {
            if let Coord::Var(v) = pos[i + 1][axis] {
                let a = uav.initial[axis] / scale;
                let b = uav.final_location[axis] / scale;
                z0[v] = a + frac * (b - a);
            }
        }
    }

    (prog, Layout { n, times, pos, energy, speed, ordering }, z0)
}

fn value(c: Coord, z: &[f64]) -> f64 {
    match c {
        Coord::Var(i) => z[i],
        Coord::Fixed(v) => v,
    }
}

/// Solves for optimal update times and waypoints of a fixed schedule with the
/// default tolerance.
pub fn solve_schedule_default(s: &Scenario, u: &SchedulePolicy) -> Result<TrajectorySolution, SolveError> {
    solve_schedule(s, u, DEFAULT_TOL)
}

/// Minimizes NWAoI over update times and UAV waypoints for schedule `u`,
/// subject to per-node energy budgets, per-axis speed limits, fixed endpoints
/// and nondecreasing update times.
///
/// `tol` bounds the KKT residual (in scaled units) required for
/// [`SolveStatus::Optimal`].
pub fn solve_schedule(s: &Scenario, u: &SchedulePolicy, tol: f64) -> Result<TrajectorySolution, SolveError> {
    if !(tol > 0.0) {
        return Err(SolveError::Tolerance);
    }
    let big_m = s.num_nodes();
    if let Some(&bad) = u.order().iter().find(|&&m| m >= big_m) {
        return Err(SolveError::UnknownNode { node: bad, num_nodes: big_m });
    }
    if u.is_empty() {
        return Ok(TrajectorySolution {
            policy: u.clone(),
            times: Vec::new(),
            waypoints: Vec::new(),
            objective: 1.0,
            status: SolveStatus::Optimal,
            kkt_residual: 0.0,
            iterations: 0,
            coincident: Vec::new(),
            multipliers: Multipliers::default(),
        });
    }

    let counts = u.counts(big_m);
    let budgets: Vec<f64> = (0..big_m).map(|m| physics::energy_budget_constant(s, m, counts[m])).collect();
    if budgets.iter().any(|&c| c < 0.0) {
        return Ok(TrajectorySolution::infeasible(u.clone(), SolveStatus::Infeasible));
    }

    let (prog, layout, z0) = build_program(s, u, &budgets);
    let opts = IpmOptions { gap_tol: (tol * 1e-2).max(1e-12), ..IpmOptions::default() };
    let start = match ipm::phase_one(&prog, &z0, &opts) {
        PhaseOne::Feasible(z) => z,
        PhaseOne::Infeasible => return Ok(TrajectorySolution::infeasible(u.clone(), SolveStatus::Infeasible)),
        PhaseOne::Undecided => {
            return Ok(TrajectorySolution::infeasible(u.clone(), SolveStatus::MaxIterations))
        }
    };
    let out = ipm::solve(&prog, start, &opts, None);
    let kkt = prog.kkt_residual(&out.z, &out.duals);

    let scale = s.region();
    let tau = s.horizon();
    let times: Vec<f64> = (1..=layout.n).map(|i| value(layout.times[i], &out.z) * tau).collect();
    let waypoints: Vec<[f64; 2]> = (1..=layout.n)
        .map(|i| [value(layout.pos[i][0], &out.z) * scale, value(layout.pos[i][1], &out.z) * scale])
        .collect();
    let coincident = times.windows(2).enumerate().filter(|(_, w)| w[1] - w[0] <= 1e-6 * tau).map(|(i, _)| i).collect();

    let dual = |i: Option<usize>| i.map_or(0.0, |j| out.duals[j]);
    let pair = |p: Option<[usize; 2]>| p.map_or([0.0; 2], |[a, b]| [out.duals[a], out.duals[b]]);
    let multipliers = Multipliers {
        energy: layout.energy.iter().map(|&e| dual(e)).collect(),
        speed_x: layout.speed.iter().map(|s| pair(s[0])).collect(),
        speed_y: layout.speed.iter().map(|s| pair(s[1])).collect(),
        ordering: layout.ordering.iter().map(|&j| out.duals[j]).collect(),
    };

    let mut solution = TrajectorySolution {
        policy: u.clone(),
        times,
        waypoints,
        objective: 0.0,
        status: if kkt <= tol { SolveStatus::Optimal } else { SolveStatus::MaxIterations },
        kkt_residual: kkt,
        iterations: out.iterations,
        coincident,
        multipliers,
    };
    solution.objective = physics::nwaoi(s, &solution.per_node_times(big_m));
    Ok(solution)
}
