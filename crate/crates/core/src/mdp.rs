//! Episodic MDP over schedule prefixes.
//!
//! The state lists every node's residual battery and the mission clock after
//! each update of the current schedule; an action appends one node (or
//! terminates with action 0) and the whole schedule is re-solved.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qp::{self, SchedulePolicy, SolveStatus, TrajectorySolution};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdpError {
    #[error("episode already terminated")]
    Terminated,
    #[error("action {action} out of range 0..={max}")]
    InvalidAction { action: usize, max: usize },
}

/// `(M + 1) x (n + 1)` matrix stored column by column. Column 0 holds the
/// full batteries and time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMatrix {
    pub columns: Vec<Vec<f64>>,
}

impl StateMatrix {
    pub fn initial(s: &Scenario) -> Self {
        let mut col: Vec<f64> = s.nodes().iter().map(|n| n.battery).collect();
        col.push(0.0);
        StateMatrix { columns: vec![col] }
    }

    /// Builds the state of a solved schedule: after update `i`, node `m`'s
    /// battery minus everything it has spent so far, and `t_i`.
    pub fn from_solution(s: &Scenario, sol: &TrajectorySolution) -> Self {
        let mut state = StateMatrix::initial(s);
        let mut energy: Vec<f64> = s.nodes().iter().map(|n| n.battery).collect();
        let spent = sol.update_energies(s);
        for ((&m, &t), e) in sol.policy.order().iter().zip(&sol.times).zip(spent) {
            energy[m] -= e;
            let mut col = energy.clone();
            col.push(t);
            state.columns.push(col);
        }
        state
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn last_column(&self) -> &[f64] {
        self.columns.last().expect("state has at least the initial column")
    }

    /// Energies divided by each node's battery, time by the horizon.
    pub fn normalized_columns(&self, s: &Scenario) -> Vec<Vec<f64>> {
        self.columns.iter().map(|c| normalize_column(s, c)).collect()
    }
}

pub fn normalize_column(s: &Scenario, col: &[f64]) -> Vec<f64> {
    let m = s.num_nodes();
    col.iter()
        .enumerate()
        .map(|(i, &v)| if i < m { v / s.node(i).battery } else { v / s.horizon() })
        .collect()
}

pub fn denormalize_column(s: &Scenario, col: &[f64]) -> Vec<f64> {
    let m = s.num_nodes();
    col.iter()
        .enumerate()
        .map(|(i, &v)| if i < m { v * s.node(i).battery } else { v * s.horizon() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: StateMatrix,
    pub action: usize,
    pub reward: f64,
    pub next_state: StateMatrix,
    pub terminal: bool,
    /// The action was rejected because the grown schedule had no solution.
    pub infeasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub tol: f64,
    /// Reward for an infeasible action; 0 keeps the returns telescoping.
    pub infeasible_penalty: f64,
    /// Episodes are cut after this many node actions.
    pub max_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { tol: qp::DEFAULT_TOL, infeasible_penalty: 0.0, max_steps: 64 }
    }
}

/// One episode at a time over a fixed scenario. Solutions are cached per
/// schedule across episodes.
#[derive(Debug, Clone)]
pub struct AoiEnv {
    scenario: Scenario,
    config: EnvConfig,
    policy: SchedulePolicy,
    objective: f64,
    state: StateMatrix,
    terminal: bool,
    cache: BTreeMap<SchedulePolicy, TrajectorySolution>,
}

impl AoiEnv {
    pub fn new(scenario: Scenario, config: EnvConfig) -> Self {
        let state = StateMatrix::initial(&scenario);
        AoiEnv {
            scenario,
            config,
            policy: SchedulePolicy::empty(),
            objective: 1.0,
            state,
            terminal: false,
            cache: BTreeMap::new(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn num_actions(&self) -> usize {
        self.scenario.num_nodes() + 1
    }

    pub fn reset(&mut self) -> StateMatrix {
        self.policy = SchedulePolicy::empty();
        self.objective = 1.0;
        self.state = StateMatrix::initial(&self.scenario);
        self.terminal = false;
        self.state.clone()
    }

    pub fn state(&self) -> &StateMatrix {
        &self.state
    }

    pub fn policy(&self) -> &SchedulePolicy {
        &self.policy
    }

    /// NWAoI of the current schedule.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn solve(&mut self, u: &SchedulePolicy) -> TrajectorySolution {
        if let Some(sol) = self.cache.get(u) {
            return sol.clone();
        }
        let sol = qp::solve_schedule(&self.scenario, u, self.config.tol).expect("environment only builds valid schedules");
        if sol.status == SolveStatus::MaxIterations {
            log::warn!("solver hit its iteration cap on {:?}; treating the action as infeasible", u.order());
        }
        self.cache.insert(u.clone(), sol.clone());
        sol
    }

    /// Action `0` terminates; action `m >= 1` appends node `m - 1`.
    pub fn step(&mut self, action: usize) -> Result<Transition, MdpError> {
        if self.terminal {
            return Err(MdpError::Terminated);
        }
        let max = self.scenario.num_nodes();
        if action > max {
            return Err(MdpError::InvalidAction { action, max });
        }
        let before = self.state.clone();
        if action == 0 {
            self.terminal = true;
            return Ok(Transition {
                next_state: before.clone(),
                state: before,
                action,
                reward: 0.0,
                terminal: true,
                infeasible: false,
            });
        }

        let mut grown = self.policy.clone();
        grown.push(action - 1);
        let sol = self.solve(&grown);
        if sol.status != SolveStatus::Optimal {
            self.terminal = true;
            return Ok(Transition {
                next_state: before.clone(),
                state: before,
                action,
                reward: self.config.infeasible_penalty,
                terminal: true,
                infeasible: true,
            });
        }

        let reward = self.objective - sol.objective;
        self.objective = sol.objective;
        self.state = StateMatrix::from_solution(&self.scenario, &sol);
        self.policy = grown;
        self.terminal = self.policy.len() >= self.config.max_steps;
        Ok(Transition {
            state: before,
            action,
            reward,
            next_state: self.state.clone(),
            terminal: self.terminal,
            infeasible: false,
        })
    }
}

pub fn episode_return(transitions: &[Transition]) -> f64 {
    transitions.iter().map(|t| t.reward).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics;
    use crate::scenario::{generate_with, ChannelParams, GeneratorConfig, Node, UavParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const E1: f64 = 6.5472e-4;

    fn hover(battery: f64) -> Scenario {
        Scenario::new(
            1000.0,
            vec![Node::new(0, [0.0, 0.0], battery, 1.0)],
            ChannelParams::default(),
            UavParams::new([0.0, 0.0], [0.0, 0.0], 25.0, 900.0),
        )
        .unwrap()
    }

    fn small_random(seed: u64) -> Scenario {
        // few updates per node keeps the solves cheap
        let cfg = GeneratorConfig { battery_range: (1.2 * E1, 3.8 * E1), ..GeneratorConfig::default() };
        generate_with(2, seed, 1000.0, &cfg).unwrap()
    }

    #[test]
    fn reset_column() {
        let s = Scenario::new(
            1000.0,
            vec![Node::new(0, [0.0, 0.0], 1.0, 0.5), Node::new(1, [10.0, 0.0], 0.8, 0.5)],
            ChannelParams::default(),
            UavParams::new([0.0, 0.0], [0.0, 0.0], 25.0, 900.0),
        )
        .unwrap();
        let mut env = AoiEnv::new(s, EnvConfig::default());
        let a = env.reset();
        assert_eq!(a.columns, vec![vec![1.0, 0.8, 0.0]]);
        assert_eq!(env.reset(), a);
        assert_eq!(env.objective(), 1.0);
    }

    #[test]
    fn first_hover_action_halves_nwaoi() {
        let mut env = AoiEnv::new(hover(1.0), EnvConfig::default());
        env.reset();
        let t = env.step(1).unwrap();
        assert!((t.reward - 0.5).abs() < 1e-6);
        assert!(!t.terminal);
        assert_eq!(t.next_state.num_columns(), 2);
        let stop = env.step(0).unwrap();
        assert_eq!(stop.reward, 0.0);
        assert!(stop.terminal);
        assert_eq!(env.step(1), Err(MdpError::Terminated));
    }

    #[test]
    fn infeasible_action_keeps_policy() {
        let mut env = AoiEnv::new(hover(1.5 * E1), EnvConfig::default());
        env.reset();
        env.step(1).unwrap();
        let t = env.step(1).unwrap();
        assert!(t.terminal && t.infeasible);
        assert_eq!(t.reward, 0.0);
        assert_eq!(env.policy().len(), 1);
        assert_eq!(t.next_state, t.state);
    }

    #[test]
    fn penalty_knob_applies_to_infeasible_steps() {
        let cfg = EnvConfig { infeasible_penalty: -0.25, ..EnvConfig::default() };
        let mut env = AoiEnv::new(hover(0.5 * E1), cfg);
        env.reset();
        let t = env.step(1).unwrap();
        assert!(t.infeasible);
        assert_eq!(t.reward, -0.25);
    }

    #[test]
    fn invalid_action_rejected() {
        let mut env = AoiEnv::new(hover(1.0), EnvConfig::default());
        env.reset();
        assert_eq!(env.step(2), Err(MdpError::InvalidAction { action: 2, max: 1 }));
    }

    #[test]
    fn max_steps_truncates() {
        let cfg = EnvConfig { max_steps: 2, ..EnvConfig::default() };
        let mut env = AoiEnv::new(hover(1.0), cfg);
        env.reset();
        assert!(!env.step(1).unwrap().terminal);
        assert!(env.step(1).unwrap().terminal);
    }

    #[test]
    fn empty_episode_returns_zero() {
        let mut env = AoiEnv::new(hover(1.0), EnvConfig::default());
        env.reset();
        let t = env.step(0).unwrap();
        assert_eq!(episode_return(&[t]), 0.0);
    }

    #[test]
    fn energy_bookkeeping() {
        let s = small_random(5);
        let mut env = AoiEnv::new(s.clone(), EnvConfig::default());
        env.reset();
        for a in [1, 2, 1] {
            if env.step(a).unwrap().terminal {
                break;
            }
        }
        let sol = qp::solve_schedule_default(&s, env.policy()).unwrap();
        let state = env.state();
        let spent = sol.update_energies(&s);
        for m in 0..s.num_nodes() {
            let total: f64 = env.policy().order().iter().zip(&spent).filter(|(&n, _)| n == m).map(|(_, e)| e).sum();
            let last = state.last_column()[m];
            assert!((s.node(m).battery - total - last).abs() < 1e-9);
            for w in state.columns.windows(2) {
                assert!(w[1][m] <= w[0][m]);
                assert!(w[1][m] >= -1e-12);
            }
        }
        for w in state.columns.windows(2) {
            assert!(w[1][2] >= w[0][2]);
        }
    }

    #[test]
    fn normalization_round_trips() {
        let s = small_random(9);
        let col = vec![0.3 * s.node(0).battery, 0.7 * s.node(1).battery, 123.0];
        let n = normalize_column(&s, &col);
        assert!((n[0] - 0.3).abs() < 1e-15 && (n[2] - 123.0 / 900.0).abs() < 1e-15);
        let back = denormalize_column(&s, &n);
        for (a, b) in col.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn returns_telescope(seed in 0u64..1000) {
            let s = small_random(seed);
            let mut env = AoiEnv::new(s.clone(), EnvConfig::default());
            env.reset();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut transitions = Vec::new();
            loop {
                let t = env.step(rng.gen_range(0..3)).unwrap();
                let done = t.terminal;
                transitions.push(t);
                if done {
                    break;
                }
            }
            let sol = qp::solve_schedule_default(&s, env.policy()).unwrap();
            let g = physics::nwaoi(&s, &sol.per_node_times(2));
            prop_assert!((1.0 - episode_return(&transitions) - g).abs() < 1e-12);
        }

        #[test]
        fn state_is_path_independent(seed in 0u64..1000) {
            let s = small_random(seed);
            let mut env = AoiEnv::new(s.clone(), EnvConfig::default());
            env.reset();
            for a in [2, 1, 2] {
                if env.step(a).unwrap().terminal {
                    break;
                }
            }
            let sol = qp::solve_schedule_default(&s, env.policy()).unwrap();
            let direct = if env.policy().is_empty() { StateMatrix::initial(&s) } else { StateMatrix::from_solution(&s, &sol) };
            prop_assert_eq!(env.state(), &direct);
        }
    }
}
