use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{NetworkParams, ParamShape};
use super::{check_len, glorot_uniform, Activation, NnError};

/// Fully connected layer `y = act(W x + b)`, `W` row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        DenseLayer { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs], activation }
    }

    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let weights = glorot_uniform(rng, inputs, outputs, inputs * outputs);
        DenseLayer { inputs, outputs, weights, bias: vec![0.0; outputs], activation }
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// Per-layer inputs and pre-activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<DenseLayer>,
}

impl DenseNet {
    /// `sizes` lists input then every layer width; one activation per layer.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], activations: &[Activation], rng: &mut R) -> Self {
        assert_eq!(sizes.len(), activations.len() + 1, "one activation per layer");
        let layers = sizes.windows(2).zip(activations).map(|(w, &a)| DenseLayer::random(w[0], w[1], a, rng)).collect();
        DenseNet { layers }
    }

    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Self {
        assert_eq!(sizes.len(), activations.len() + 1, "one activation per layer");
        let layers = sizes.windows(2).zip(activations).map(|(w, &a)| DenseLayer::zeros(w[0], w[1], a)).collect();
        DenseNet { layers }
    }

    pub fn input_size(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(DenseLayer::num_params).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        check_len(self.input_size(), x.len())?;
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer.pre_activation(&a).into_iter().map(|v| layer.activation.apply(v)).collect();
        }
        Ok(a)
    }

    pub fn forward_cache(&self, x: &[f64]) -> Result<DenseCache, NnError> {
        check_len(self.input_size(), x.len())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for layer in &self.layers {
            let z = layer.pre_activation(&a);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Ok(DenseCache { inputs, pre, output: a })
    }

    /// Accumulates `d loss / d params` into `grads` (flat layout of
    /// [`DenseNet::params`]) and returns `d loss / d input`.
    pub fn backward(&self, cache: &DenseCache, grad_out: &[f64], grads: &mut [f64]) -> Result<Vec<f64>, NnError> {
        check_len(self.output_size(), grad_out.len())?;
        check_len(self.num_params(), grads.len())?;
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut at = 0;
        for l in &self.layers {
            offsets.push(at);
            at += l.num_params();
        }
        let mut delta_out = grad_out.to_vec();
        let mut output = cache.output.clone();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.inputs[k];
            let z = &cache.pre[k];
            let delta: Vec<f64> =
                (0..layer.outputs).map(|o| delta_out[o] * layer.activation.derivative(z[o], output[o])).collect();
            let base = offsets[k];
            for o in 0..layer.outputs {
                for i in 0..layer.inputs {
                    grads[base + o * layer.inputs + i] += delta[o] * x[i];
                }
                grads[base + layer.weights.len() + o] += delta[o];
            }
            let mut dx = vec![0.0; layer.inputs];
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (d, w) in dx.iter_mut().zip(row) {
                    *d += delta[o] * w;
                }
            }
            delta_out = dx;
            output = x.clone();
        }
        Ok(delta_out)
    }

    /// `d output / d input`, one row per output.
    pub fn input_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, NnError> {
        let cache = self.forward_cache(x)?;
        let mut scratch = vec![0.0; self.num_params()];
        (0..self.output_size())
            .map(|o| {
                let mut seed = vec![0.0; self.output_size()];
                seed[o] = 1.0;
                self.backward(&cache, &seed, &mut scratch)
            })
            .collect()
    }

    /// Weights then biases of each layer, in order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<(), NnError> {
        check_len(self.num_params(), values.len())?;
        let mut at = 0;
        for l in &mut self.layers {
            let w = l.weights.len();
            l.weights.copy_from_slice(&values[at..at + w]);
            at += w;
            let b = l.bias.len();
            l.bias.copy_from_slice(&values[at..at + b]);
            at += b;
        }
        Ok(())
    }

    pub fn manifest(&self) -> Vec<ParamShape> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (k, l) in self.layers.iter().enumerate() {
            out.push(ParamShape { name: format!("dense{k}.weight"), rows: l.outputs, cols: l.inputs });
            out.push(ParamShape { name: format!("dense{k}.bias"), rows: l.outputs, cols: 1 });
        }
        out
    }

    pub fn to_params(&self) -> NetworkParams {
        NetworkParams::new(self.manifest(), self.params()).expect("manifest matches parameter count")
    }

    pub fn load_params(&mut self, p: &NetworkParams) -> Result<(), NnError> {
        if p.manifest != self.manifest() {
            return Err(NnError::Manifest);
        }
        self.set_params(&p.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{gradient_check, relative_error, FD_STEP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_zero() {
        let net = DenseNet::zeros(&[3, 4, 2], &[Activation::Identity, Activation::Identity]);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_affine() {
        let mut net = DenseNet::zeros(&[1, 1], &[Activation::Identity]);
        net.set_params(&[2.0, 1.0]).unwrap();
        for x in [-1.5, 0.0, 3.0] {
            assert_eq!(net.forward(&[x]).unwrap(), vec![x * 2.0 + 1.0]);
        }
    }

    #[test]
    fn shape_mismatch() {
        let net = DenseNet::zeros(&[2, 1], &[Activation::Relu]);
        assert_eq!(net.forward(&[1.0]), Err(NnError::Shape { expected: 2, got: 1 }));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DenseNet::new(&[4, 6, 3], &[Activation::Tanh, Activation::Sigmoid], &mut rng);
        let x = [0.3, -0.7, 0.1, 0.9];
        let jac = net.input_jacobian(&x).unwrap();
        for o in 0..3 {
            for i in 0..4 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += FD_STEP;
                xm[i] -= FD_STEP;
                let fd = (net.forward(&xp).unwrap()[o] - net.forward(&xm).unwrap()[o]) / (2.0 * FD_STEP);
                assert!(relative_error(jac[o][i], fd) <= 1e-5);
            }
        }
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = DenseNet::new(&[3, 5, 4, 2], &[Activation::Tanh, Activation::Sigmoid, Activation::Identity], &mut rng);
        let x = [0.2, -0.4, 0.8];
        let target = [0.5, -0.25];
        let loss = |p: &[f64]| {
            let mut n = net.clone();
            n.set_params(p).unwrap();
            let y = n.forward(&x).unwrap();
            y.iter().zip(&target).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum::<f64>()
        };
        let cache = net.forward_cache(&x).unwrap();
        let grad_out: Vec<f64> = cache.output.iter().zip(&target).map(|(a, b)| a - b).collect();
        let mut grads = vec![0.0; net.num_params()];
        net.backward(&cache, &grad_out, &mut grads).unwrap();
        assert!(gradient_check(&net.params(), &grads, loss) <= 1e-5);
    }

    #[test]
    fn params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = DenseNet::new(&[2, 3, 1], &[Activation::Relu, Activation::Identity], &mut rng);
        let p = net.to_params();
        let mut other = DenseNet::zeros(&[2, 3, 1], &[Activation::Relu, Activation::Identity]);
        other.load_params(&p).unwrap();
        assert_eq!(other, net);
        let mut wrong = DenseNet::zeros(&[3, 3, 1], &[Activation::Relu, Activation::Identity]);
        assert_eq!(wrong.load_params(&p), Err(NnError::Manifest));
    }
}
