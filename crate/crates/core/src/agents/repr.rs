use alloc::vec::Vec;

use super::autoencoder::LstmAutoencoder;
use super::Environment;
use crate::mdp::{normalize_column, AoiEnv, StateMatrix};
use crate::scenario::Scenario;

/// Maps a variable-width state matrix to a fixed-size vector.
pub trait StateEncoder {
    fn size(&self) -> usize;
    fn encode(&self, s: &Scenario, state: &StateMatrix) -> Vec<f64>;
}

/// The normalized most recent column: residual batteries over capacity and
/// elapsed time over the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastColumn {
    pub num_nodes: usize,
}

impl StateEncoder for LastColumn {
    fn size(&self) -> usize {
        self.num_nodes + 1
    }

    fn encode(&self, s: &Scenario, state: &StateMatrix) -> Vec<f64> {
        normalize_column(s, state.last_column())
    }
}

/// Concatenated final cell and hidden state of a trained encoder, with the
/// cell part truncated or zero-padded to `cell_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderRepr {
    pub model: LstmAutoencoder,
    pub cell_size: usize,
}

impl AutoencoderRepr {
    pub fn new(model: LstmAutoencoder) -> Self {
        let cell_size = model.cell_size;
        AutoencoderRepr { model, cell_size }
    }

    pub fn with_cell_size(model: LstmAutoencoder, cell_size: usize) -> Self {
        AutoencoderRepr { model, cell_size }
    }
}

impl StateEncoder for AutoencoderRepr {
    fn size(&self) -> usize {
        self.cell_size + self.model.hidden()
    }

    fn encode(&self, s: &Scenario, state: &StateMatrix) -> Vec<f64> {
        let (c, h) = self.model.encode(&state.normalized_columns(s));
        let kept = self.model.cell_size;
        let mut out: Vec<f64> = c.into_iter().take(kept).chain(core::iter::repeat(0.0)).take(self.cell_size).collect();
        out.extend(h);
        out
    }
}

/// Either encoder, chosen at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    LastColumn(LastColumn),
    Autoencoder(AutoencoderRepr),
}

impl StateEncoder for Representation {
    fn size(&self) -> usize {
        match self {
            Representation::LastColumn(r) => r.size(),
            Representation::Autoencoder(r) => r.size(),
        }
    }

    fn encode(&self, s: &Scenario, state: &StateMatrix) -> Vec<f64> {
        match self {
            Representation::LastColumn(r) => r.encode(s, state),
            Representation::Autoencoder(r) => r.encode(s, state),
        }
    }
}

/// The scheduling MDP seen through a state encoder.
#[derive(Debug, Clone)]
pub struct AoiTask<R> {
    pub env: AoiEnv,
    pub encoder: R,
}

impl<R: StateEncoder> AoiTask<R> {
    pub fn new(env: AoiEnv, encoder: R) -> Self {
        AoiTask { env, encoder }
    }

    fn observe(&self, state: &StateMatrix) -> Vec<f64> {
        self.encoder.encode(self.env.scenario(), state)
    }
}

impl<R: StateEncoder> Environment for AoiTask<R> {
    fn num_actions(&self) -> usize {
        self.env.num_actions()
    }

    fn observation_size(&self) -> usize {
        self.encoder.size()
    }

    fn reset(&mut self) -> Vec<f64> {
        let s = self.env.reset();
        self.observe(&s)
    }

    fn step(&mut self, action: usize) -> (Vec<f64>, f64, bool) {
        let t = self.env.step(action).expect("agent only steps live episodes with valid actions");
        (self.observe(&t.next_state), t.reward, t.terminal)
    }

    /// NWAoI of the schedule built so far.
    fn score(&self) -> f64 {
        self.env.objective()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::EnvConfig;
    use crate::scenario::generate_scenario;

    #[test]
    fn last_column_is_normalized_final_column() {
        let s = generate_scenario(3, 4, 1000.0).unwrap();
        let mut task = AoiTask::new(AoiEnv::new(s.clone(), EnvConfig::default()), LastColumn { num_nodes: 3 });
        let obs = task.reset();
        assert_eq!(obs.len(), 4);
        assert_eq!(obs, alloc::vec![1.0, 1.0, 1.0, 0.0]);
        let (obs, _, _) = task.step(2);
        let col = task.env.state().last_column().to_vec();
        for m in 0..3 {
            assert!((obs[m] - col[m] / s.node(m).battery).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&obs[m]));
        }
        assert!((obs[3] - col[3] / 900.0).abs() < 1e-15);
    }
}
