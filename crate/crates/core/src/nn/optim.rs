use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_len, NnError};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd { lr: f64 },
    Momentum { lr: f64, beta: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Sgd { lr: 1e-3 }
    }
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// `theta <- theta - lr * g`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), NnError> {
    check_len(params.len(), grads.len())?;
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(NnError::NonFinite);
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub config: OptimizerConfig,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, num_params: usize) -> Self {
        let second = match config {
            OptimizerConfig::Adam { .. } => vec![0.0; num_params],
            _ => Vec::new(),
        };
        Optimizer { config, first: vec![0.0; num_params], second, steps: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NnError> {
        check_len(self.first.len(), params.len())?;
        check_len(params.len(), grads.len())?;
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(NnError::NonFinite);
        }
        self.steps += 1;
        match self.config {
            OptimizerConfig::Sgd { lr } => sgd_step(params, grads, lr)?,
            OptimizerConfig::Momentum { lr, beta } => {
                for ((p, g), v) in params.iter_mut().zip(grads).zip(self.first.iter_mut()) {
                    *v = beta * *v + g;
                    *p -= lr * *v;
                }
            }
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                let c1 = 1.0 - math::pow(beta1, self.steps as f64);
                let c2 = 1.0 - math::pow(beta2, self.steps as f64);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.first[i] = beta1 * self.first[i] + (1.0 - beta1) * g;
                    self.second[i] = beta2 * self.second[i] + (1.0 - beta2) * g * g;
                    let m = self.first[i] / c1;
                    let v = self.second[i] / c2;
                    params[i] -= lr * m / (math::sqrt(v) + eps);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![1.0, -2.0];
        sgd_step(&mut p, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn quadratic_step() {
        // loss theta^2 / 2 has gradient theta
        let mut p = vec![1.0];
        let g = p.clone();
        sgd_step(&mut p, &g, 0.1).unwrap();
        assert_eq!(p, vec![0.9]);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut p = vec![1.0];
        assert_eq!(sgd_step(&mut p, &[f64::NAN], 0.1), Err(NnError::NonFinite));
        let mut opt = Optimizer::new(OptimizerConfig::adam(1e-3), 1);
        assert_eq!(opt.step(&mut p, &[f64::INFINITY]), Err(NnError::NonFinite));
    }

    #[test]
    fn least_squares_loss_never_increases() {
        // fit y = 2 x0 - x1 + 0.5 with a linear model
        let xs = [[0.1, 0.2], [0.5, -0.3], [-0.7, 0.4], [0.9, 0.9], [0.0, -1.0]];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x[0] - x[1] + 0.5).collect();
        let loss_and_grad = |p: &[f64]| {
            let mut g = vec![0.0; 3];
            let mut l = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                let r = p[0] * x[0] + p[1] * x[1] + p[2] - y;
                l += 0.5 * r * r;
                g[0] += r * x[0];
                g[1] += r * x[1];
                g[2] += r;
            }
            (l, g)
        };
        for config in [OptimizerConfig::Sgd { lr: 0.05 }, OptimizerConfig::Momentum { lr: 0.01, beta: 0.5 }] {
            let mut opt = Optimizer::new(config, 3);
            let mut p = vec![0.0; 3];
            let mut last = f64::INFINITY;
            for _ in 0..100 {
                let (l, g) = loss_and_grad(&p);
                assert!(l <= last + 1e-15);
                last = l;
                opt.step(&mut p, &g).unwrap();
            }
        }
        let mut adam = Optimizer::new(OptimizerConfig::adam(0.05), 3);
        let mut p = vec![0.0; 3];
        for _ in 0..2000 {
            let (_, g) = loss_and_grad(&p);
            adam.step(&mut p, &g).unwrap();
        }
        assert!(loss_and_grad(&p).0 < 1e-6);
    }
}
