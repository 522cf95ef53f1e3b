use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::NnError;

pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamShape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl ParamShape {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat parameter vector with the tensor shapes it is cut into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub version: u32,
    pub manifest: Vec<ParamShape>,
    pub values: Vec<f64>,
}

impl NetworkParams {
    pub fn new(manifest: Vec<ParamShape>, values: Vec<f64>) -> Result<Self, NnError> {
        let expected = manifest.iter().map(ParamShape::len).sum();
        super::check_len(expected, values.len())?;
        Ok(NetworkParams { version: PARAMS_VERSION, manifest, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slices of `values`, one per manifest entry.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.manifest.len());
        let mut at = 0;
        for shape in &self.manifest {
            out.push(&self.values[at..at + shape.len()]);
            at += shape.len();
        }
        out
    }
}
