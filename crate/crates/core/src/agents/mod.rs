//! Scheduling agents: deep Q-learning, the weight-based baseline and the
//! LSTM autoencoder state representation.

mod autoencoder;
mod dqn;
mod replay;
mod repr;
mod weight;

use alloc::vec::Vec;

pub use autoencoder::{
    corpus_from_states, hyperparameter_search, search_corpus, AutoencoderConfig, AutoencoderError, AutoencoderReport, LstmAutoencoder,
    SearchResult, SearchSpace, Sequence,
};
pub use dqn::{greedy_rollout, train_dqn, CurvePoint, DqnConfig, DqnError, EpsilonSchedule, GreedyRollout, QAgent};
pub use replay::{Experience, ReplayMemory};
pub use repr::{AoiTask, AutoencoderRepr, LastColumn, Representation, StateEncoder};
pub use weight::{weight_based_rollout, WeightRollout};

/// Episodic environment seen by the learner.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn observation_size(&self) -> usize;
    fn reset(&mut self) -> Vec<f64>;
    /// Returns `(observation, reward, terminal)`.
    fn step(&mut self, action: usize) -> (Vec<f64>, f64, bool);
    /// Task-specific figure of merit for the finished episode.
    fn score(&self) -> f64 {
        f64::NAN
    }
}
