use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::replay::{Experience, ReplayMemory};
use super::Environment;
use crate::nn::{Activation, DenseNet, NnError, Optimizer, OptimizerConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DqnError {
    #[error("training diverged at episode {episode}: loss {loss:e}")]
    Diverged { episode: usize, loss: f64 },
    #[error(transparent)]
    Network(#[from] NnError),
}

/// Linear decay from `start` to `end` over the first `decay_fraction` of the
/// episodes, then flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 1.0, end: 0.02, decay_fraction: 0.6 }
    }
}

impl EpsilonSchedule {
    pub fn constant(eps: f64) -> Self {
        EpsilonSchedule { start: eps, end: eps, decay_fraction: 1.0 }
    }

    pub fn value(&self, episode: usize, episodes: usize) -> f64 {
        let span = self.decay_fraction * episodes as f64;
        if span <= 0.0 {
            return self.end;
        }
        let frac = (episode as f64 / span).min(1.0);
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    /// Hidden layer widths; empty gives a single affine layer.
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub episodes: usize,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Gradient steps after each episode.
    pub updates_per_episode: usize,
    pub optimizer: OptimizerConfig,
    /// Training aborts once a batch loss exceeds this.
    pub divergence_limit: f64,
    /// Safety cap for environments without their own episode limit.
    pub max_episode_steps: usize,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden: vec![64],
            hidden_activation: Activation::Relu,
            episodes: 500,
            gamma: 1.0,
            epsilon: EpsilonSchedule::default(),
            replay_capacity: 10_000,
            batch_size: 32,
            updates_per_episode: 1,
            optimizer: OptimizerConfig::default(),
            divergence_limit: 1e6,
            max_episode_steps: 1024,
            seed: 0,
        }
    }
}

/// Q-network over observations with one output per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAgent {
    pub net: DenseNet,
}

impl QAgent {
    pub fn new<R: Rng + ?Sized>(config: &DqnConfig, inputs: usize, actions: usize, rng: &mut R) -> Self {
        let (sizes, acts) = architecture(config, inputs, actions);
        QAgent { net: DenseNet::new(&sizes, &acts, rng) }
    }

    pub fn zeros(config: &DqnConfig, inputs: usize, actions: usize) -> Self {
        let (sizes, acts) = architecture(config, inputs, actions);
        QAgent { net: DenseNet::zeros(&sizes, &acts) }
    }

    pub fn q_values(&self, obs: &[f64]) -> Vec<f64> {
        self.net.forward(obs).expect("observation size matches the network")
    }

    /// Highest-valued action; ties go to the lowest index.
    pub fn greedy_action(&self, obs: &[f64]) -> usize {
        argmax(&self.q_values(obs))
    }
}

fn architecture(config: &DqnConfig, inputs: usize, actions: usize) -> (Vec<usize>, Vec<Activation>) {
    let mut sizes = vec![inputs];
    sizes.extend(&config.hidden);
    sizes.push(actions);
    let mut acts = vec![config.hidden_activation; config.hidden.len()];
    acts.push(Activation::Identity);
    (sizes, acts)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    /// Undiscounted sum of rewards.
    pub ret: f64,
    /// The environment's score at the end of the episode.
    pub score: f64,
    pub epsilon: f64,
    /// Mean squared TD error of the last batch, NaN before the first update.
    pub loss: f64,
}

/// Epsilon-greedy deep Q-learning. After every episode, `updates_per_episode`
/// minibatches are drawn from replay; targets use the network as it was
/// before that episode's updates.
pub fn train_dqn<E: Environment>(env: &mut E, config: &DqnConfig) -> Result<(QAgent, Vec<CurvePoint>), DqnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let actions = env.num_actions();
    let mut agent = QAgent::new(config, env.observation_size(), actions, &mut rng);
    let mut optimizer = Optimizer::new(config.optimizer, agent.net.num_params());
    let mut memory = ReplayMemory::new(config.replay_capacity);
    let mut curve = Vec::with_capacity(config.episodes);

    for episode in 0..config.episodes {
        let eps = config.epsilon.value(episode, config.episodes);
        let mut obs = env.reset();
        let mut ret = 0.0;
        for _ in 0..config.max_episode_steps {
            let action = if rng.gen::<f64>() < eps { rng.gen_range(0..actions) } else { agent.greedy_action(&obs) };
            let (next, reward, terminal) = env.step(action);
            ret += reward;
            memory.push(Experience { state: obs, action, reward, next_state: next.clone(), terminal });
            obs = next;
            if terminal {
                break;
            }
        }

        let target = agent.clone();
        let mut loss = f64::NAN;
        for _ in 0..config.updates_per_episode {
            let batch = memory.sample(&mut rng, config.batch_size);
            if batch.is_empty() {
                break;
            }
            let mut params = agent.net.params();
            let mut grads = vec![0.0; params.len()];
            let scale = 1.0 / batch.len() as f64;
            let mut total = 0.0;
            for e in batch {
                let y = if e.terminal {
                    e.reward
                } else {
                    let next_q = target.q_values(&e.next_state);
                    e.reward + config.gamma * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                };
                let cache = agent.net.forward_cache(&e.state)?;
                let err = cache.output[e.action] - y;
                total += err * err;
                let mut grad_out = vec![0.0; actions];
                grad_out[e.action] = 2.0 * err * scale;
                agent.net.backward(&cache, &grad_out, &mut grads)?;
            }
            loss = total * scale;
            if !(loss <= config.divergence_limit) {
                return Err(DqnError::Diverged { episode, loss });
            }
            optimizer.step(&mut params, &grads)?;
            agent.net.set_params(&params)?;
        }
        curve.push(CurvePoint { episode, ret, score: env.score(), epsilon: eps, loss });
    }
    Ok((agent, curve))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyRollout {
    pub actions: Vec<usize>,
    pub ret: f64,
    pub score: f64,
}

/// Runs one episode choosing the greedy action everywhere.
pub fn greedy_rollout<E: Environment>(agent: &QAgent, env: &mut E, max_steps: usize) -> GreedyRollout {
    let mut obs = env.reset();
    let mut actions = Vec::new();
    let mut ret = 0.0;
    for _ in 0..max_steps {
        let a = agent.greedy_action(&obs);
        let (next, r, terminal) = env.step(a);
        actions.push(a);
        ret += r;
        obs = next;
        if terminal {
            break;
        }
    }
    GreedyRollout { actions, ret, score: env.score() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AoiTask, LastColumn};
    use crate::mdp::{AoiEnv, EnvConfig};
    use crate::scenario::{ChannelParams, Node, Scenario, UavParams};

    /// Two states, two actions, one-hot observations.
    ///
    /// From A: action 0 ends with 0.5, action 1 moves to B with 0.2.
    /// From B: action 0 ends with 1.0, action 1 ends with 0.3.
    struct TwoState {
        at_b: bool,
    }

    impl Environment for TwoState {
        fn num_actions(&self) -> usize {
            2
        }
        fn observation_size(&self) -> usize {
            2
        }
        fn reset(&mut self) -> Vec<f64> {
            self.at_b = false;
            vec![1.0, 0.0]
        }
        fn step(&mut self, action: usize) -> (Vec<f64>, f64, bool) {
            match (self.at_b, action) {
                (false, 0) => (vec![1.0, 0.0], 0.5, true),
                (false, _) => {
                    self.at_b = true;
                    (vec![0.0, 1.0], 0.2, false)
                }
                (true, 0) => (vec![0.0, 1.0], 1.0, true),
                (true, _) => (vec![0.0, 1.0], 0.3, true),
            }
        }
    }

    fn tabular_config() -> DqnConfig {
        DqnConfig {
            hidden: vec![],
            episodes: 400,
            epsilon: EpsilonSchedule::constant(1.0),
            batch_size: 16,
            updates_per_episode: 8,
            optimizer: OptimizerConfig::Sgd { lr: 0.1 },
            seed: 3,
            ..DqnConfig::default()
        }
    }

    #[test]
    fn epsilon_schedule_shape() {
        let e = EpsilonSchedule::default();
        assert_eq!(e.value(0, 100), 1.0);
        assert!((e.value(30, 100) - 0.51).abs() < 1e-12);
        assert!((e.value(60, 100) - 0.02).abs() < 1e-12);
        assert!((e.value(99, 100) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn tabular_q_matches_value_iteration() {
        let mut env = TwoState { at_b: false };
        let (agent, _) = train_dqn(&mut env, &tabular_config()).unwrap();
        let qa = agent.q_values(&[1.0, 0.0]);
        let qb = agent.q_values(&[0.0, 1.0]);
        let expected = [[0.5, 1.2], [1.0, 0.3]];
        for (got, want) in [qa, qb].iter().zip(expected) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-3, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn zero_network_terminates_immediately() {
        let s = Scenario::new(
            1000.0,
            vec![Node::new(0, [0.0, 0.0], 1.0, 1.0)],
            ChannelParams::default(),
            UavParams::new([0.0, 0.0], [0.0, 0.0], 25.0, 900.0),
        )
        .unwrap();
        let mut task = AoiTask::new(AoiEnv::new(s, EnvConfig::default()), LastColumn { num_nodes: 1 });
        let agent = QAgent::zeros(&DqnConfig::default(), 2, 2);
        let r = greedy_rollout(&agent, &mut task, 100);
        assert_eq!(r.actions, vec![0]);
        assert_eq!(r.score, 1.0);
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = DqnConfig { episodes: 50, ..tabular_config() };
        let a = train_dqn(&mut TwoState { at_b: false }, &cfg).unwrap();
        let b = train_dqn(&mut TwoState { at_b: false }, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        let bits = |c: &[CurvePoint]| c.iter().map(|p| (p.ret.to_bits(), p.loss.to_bits(), p.epsilon.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&a.1), bits(&b.1));
    }

    #[test]
    fn divergence_guard_trips() {
        let cfg = DqnConfig { optimizer: OptimizerConfig::Sgd { lr: 50.0 }, divergence_limit: 10.0, ..tabular_config() };
        assert!(matches!(train_dqn(&mut TwoState { at_b: false }, &cfg), Err(DqnError::Diverged { .. })));
    }

    #[test]
    fn terminal_targets_are_the_reward() {
        // a zero network and one update on a terminal sample moves Q towards r only
        let mut env = TwoState { at_b: true };
        struct Stuck<'a>(&'a mut TwoState);
        impl Environment for Stuck<'_> {
            fn num_actions(&self) -> usize {
                2
            }
            fn observation_size(&self) -> usize {
                2
            }
            fn reset(&mut self) -> Vec<f64> {
                self.0.at_b = true;
                vec![0.0, 1.0]
            }
            fn step(&mut self, _: usize) -> (Vec<f64>, f64, bool) {
                self.0.step(0)
            }
        }
        let cfg = DqnConfig { episodes: 300, updates_per_episode: 4, ..tabular_config() };
        let (agent, _) = train_dqn(&mut Stuck(&mut env), &cfg).unwrap();
        let q = agent.q_values(&[0.0, 1.0]);
        assert!((q[0] - 1.0).abs() < 1e-3 && (q[1] - 1.0).abs() < 1e-3, "{q:?}");
    }
}
