//! Dense layers, the LSTM cell, backpropagation and optimizers in `f64`.

mod dense;
mod gradcheck;
mod lstm;
mod optim;
mod params;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

pub use dense::{DenseCache, DenseLayer, DenseNet};
pub use gradcheck::{gradient_check, relative_error, FD_STEP};
pub use lstm::{LstmCell, LstmStep};
pub use optim::{sgd_step, Optimizer, OptimizerConfig};
pub use params::{NetworkParams, ParamShape, PARAMS_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite gradient")]
    NonFinite,
    #[error("parameter manifest does not match the architecture")]
    Manifest,
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<(), NnError> {
    if expected == got {
        Ok(())
    } else {
        Err(NnError::Shape { expected, got })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => math::sigmoid(x),
            Activation::Tanh => math::tanh(x),
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Uniform on `+-sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, len: usize) -> alloc::vec::Vec<f64> {
    let limit = math::sqrt(6.0 / (fan_in + fan_out).max(1) as f64);
    (0..len).map(|_| rng.gen_range(-limit..=limit)).collect()
}
