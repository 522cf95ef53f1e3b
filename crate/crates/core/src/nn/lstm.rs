use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{NetworkParams, ParamShape};
use super::{check_len, glorot_uniform, NnError};
use crate::math;

const GATES: [&str; 4] = ["forget", "input", "candidate", "output"];

/// LSTM cell whose gates act on the concatenation `[h; x]`.
///
/// ```text
/// f = sigma(W_f [h; x] + b_f)     r = sigma(W_r [h; x] + b_r)
/// g = tanh(W_c [h; x] + b_c)      o = sigma(W_o [h; x] + b_o)
/// c' = f * c + r * g              h' = o * tanh(c')
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub input_size: usize,
    pub hidden: usize,
    /// Gate matrices in the order forget, input, candidate, output; each
    /// row-major `hidden x (hidden + input_size)`.
    pub weights: [Vec<f64>; 4],
    pub biases: [Vec<f64>; 4],
}

/// Everything one step needs for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    concat: Vec<f64>,
    gates: [Vec<f64>; 4],
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        let w = vec![0.0; hidden * (hidden + input_size)];
        let b = vec![0.0; hidden];
        LstmCell {
            input_size,
            hidden,
            weights: [w.clone(), w.clone(), w.clone(), w],
            biases: [b.clone(), b.clone(), b.clone(), b],
        }
    }

    pub fn random<R: Rng + ?Sized>(input_size: usize, hidden: usize, rng: &mut R) -> Self {
        let mut cell = LstmCell::zeros(input_size, hidden);
        let fan_in = hidden + input_size;
        for w in cell.weights.iter_mut() {
            *w = glorot_uniform(rng, fan_in, hidden, hidden * fan_in);
        }
        cell
    }

    fn width(&self) -> usize {
        self.hidden + self.input_size
    }

    pub fn num_params(&self) -> usize {
        4 * self.hidden * (self.width() + 1)
    }

    pub fn step(&self, h: &[f64], c: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NnError> {
        let s = self.step_cache(h, c, x)?;
        Ok((s.h, s.c))
    }

    pub fn step_cache(&self, h: &[f64], c: &[f64], x: &[f64]) -> Result<LstmStep, NnError> {
        check_len(self.hidden, h.len())?;
        check_len(self.hidden, c.len())?;
        check_len(self.input_size, x.len())?;
        let mut concat = Vec::with_capacity(self.width());
        concat.extend_from_slice(h);
        concat.extend_from_slice(x);
        let k = self.hidden;
        let w = self.width();
        let gates: [Vec<f64>; 4] = core::array::from_fn(|g| {
            (0..k)
                .map(|j| {
                    let z = self.biases[g][j] + math::dot(&self.weights[g][j * w..(j + 1) * w], &concat);
                    if g == 2 {
                        math::tanh(z)
                    } else {
                        math::sigmoid(z)
                    }
                })
                .collect()
        });
        let c_new: Vec<f64> = (0..k).map(|j| gates[0][j] * c[j] + gates[1][j] * gates[2][j]).collect();
        let tanh_c: Vec<f64> = c_new.iter().map(|&v| math::tanh(v)).collect();
        let h_new = (0..k).map(|j| gates[3][j] * tanh_c[j]).collect();
        Ok(LstmStep { concat, gates, c_prev: c.to_vec(), tanh_c, h: h_new, c: c_new })
    }

    /// Runs the cell over `inputs` from `(h0, c0)`.
    pub fn run(&self, h0: &[f64], c0: &[f64], inputs: &[Vec<f64>]) -> Result<Vec<LstmStep>, NnError> {
        let mut out: Vec<LstmStep> = Vec::with_capacity(inputs.len());
        for x in inputs {
            let step = match out.last() {
                Some(prev) => self.step_cache(&prev.h, &prev.c, x)?,
                None => self.step_cache(h0, c0, x)?,
            };
            out.push(step);
        }
        Ok(out)
    }

    /// Backpropagates one step. Takes the gradients flowing into this step's
    /// `h` and `c`, accumulates parameter gradients and returns
    /// `(dh_prev, dc_prev, dx)`.
    pub fn backward_step(
        &self,
        step: &LstmStep,
        dh: &[f64],
        dc_next: &[f64],
        grads: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k = self.hidden;
        let w = self.width();
        let [f, r, g, o] = &step.gates;
        let mut dz: [Vec<f64>; 4] = core::array::from_fn(|_| vec![0.0; k]);
        let mut dc_prev = vec![0.0; k];
        for j in 0..k {
            let tc = step.tanh_c[j];
            let dc = dc_next[j] + dh[j] * o[j] * (1.0 - tc * tc);
            dz[3][j] = dh[j] * tc * o[j] * (1.0 - o[j]);
            dz[0][j] = dc * step.c_prev[j] * f[j] * (1.0 - f[j]);
            dz[1][j] = dc * g[j] * r[j] * (1.0 - r[j]);
            dz[2][j] = dc * r[j] * (1.0 - g[j] * g[j]);
            dc_prev[j] = dc * f[j];
        }
        let mut dv = vec![0.0; w];
        let block = k * (w + 1);
        for gate in 0..4 {
            let base = gate * block;
            for j in 0..k {
                let d = dz[gate][j];
                if d == 0.0 {
                    continue;
                }
                let row = &self.weights[gate][j * w..(j + 1) * w];
                for i in 0..w {
                    grads[base + j * w + i] += d * step.concat[i];
                    dv[i] += d * row[i];
                }
                grads[base + k * w + j] += d;
            }
        }
        let dx = dv.split_off(k);
        (dv, dc_prev, dx)
    }

    /// Backpropagation through time over a sequence produced by [`run`].
    ///
    /// `dh_steps[t]` is the loss gradient with respect to the `h` output at
    /// step `t`; `dh_last`/`dc_last` flow into the final state. Returns the
    /// gradients with respect to `(h0, c0)` and each input.
    ///
    /// [`run`]: LstmCell::run
    pub fn backward_sequence(
        &self,
        steps: &[LstmStep],
        dh_steps: Option<&[Vec<f64>]>,
        dh_last: &[f64],
        dc_last: &[f64],
        grads: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let mut dh = dh_last.to_vec();
        let mut dc = dc_last.to_vec();
        let mut dxs = vec![Vec::new(); steps.len()];
        for t in (0..steps.len()).rev() {
            if let Some(extra) = dh_steps {
                for (a, b) in dh.iter_mut().zip(&extra[t]) {
                    *a += b;
                }
            }
            let (dh_prev, dc_prev, dx) = self.backward_step(&steps[t], &dh, &dc, grads);
            dh = dh_prev;
            dc = dc_prev;
            dxs[t] = dx;
        }
        (dh, dc, dxs)
    }

    /// Per gate: weights then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for g in 0..4 {
            out.extend_from_slice(&self.weights[g]);
            out.extend_from_slice(&self.biases[g]);
        }
        out
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<(), NnError> {
        check_len(self.num_params(), values.len())?;
        let mut at = 0;
        for g in 0..4 {
            let w = self.weights[g].len();
            self.weights[g].copy_from_slice(&values[at..at + w]);
            at += w;
            self.biases[g].copy_from_slice(&values[at..at + self.hidden]);
            at += self.hidden;
        }
        Ok(())
    }

    pub fn manifest(&self, prefix: &str) -> Vec<ParamShape> {
        let mut out = Vec::with_capacity(8);
        for name in GATES {
            out.push(ParamShape { name: format!("{prefix}.{name}.weight"), rows: self.hidden, cols: self.width() });
            out.push(ParamShape { name: format!("{prefix}.{name}.bias"), rows: self.hidden, cols: 1 });
        }
        out
    }

    pub fn to_params(&self, prefix: &str) -> NetworkParams {
        NetworkParams::new(self.manifest(prefix), self.params()).expect("manifest matches parameter count")
    }
}
