use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mdp::{AoiEnv, StateMatrix};
use crate::qp::SchedulePolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRollout {
    pub policy: SchedulePolicy,
    pub objective: f64,
    pub state: StateMatrix,
    /// States visited, starting with the initial one.
    pub states: Vec<StateMatrix>,
}

fn node_sampler(weights: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(weights).expect("weights are normalized and not all zero")
}

/// Appends nodes drawn with probability proportional to their weights until
/// an append turns infeasible (or the step cap is hit). Never terminates on
/// its own.
pub fn weight_based_rollout(env: &mut AoiEnv, seed: u64) -> WeightRollout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = node_sampler(&env.scenario().weights());
    let mut states = alloc::vec![env.reset()];
    loop {
        let node = dist.sample(&mut rng);
        let t = env.step(node + 1).expect("episode is live");
        if !t.infeasible {
            states.push(t.next_state);
        }
        if t.terminal {
            break;
        }
    }
    WeightRollout { policy: env.policy().clone(), objective: env.objective(), state: env.state().clone(), states }
}
