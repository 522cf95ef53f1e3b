//! Log-barrier interior-point kernel for small convex QCQPs.
//!
//! Minimizes `1/2 z'Pz + q'z + c` subject to constraints of the form
//! `sum_k (z_{i_k} - center_k)^2 + sum_l a_l z_{j_l} + constant <= 0`,
//! which covers both linear inequalities and the separable energy balls used
//! by the trajectory programs.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, SquareMatrix};
use crate::math;

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Constraint {
    /// `(variable, center)` pairs contributing `(z_v - center)^2`.
    pub quad: Vec<(usize, f64)>,
    /// `(variable, coefficient)` pairs.
    pub lin: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Constraint {
    pub fn value(&self, z: &[f64]) -> f64 {
        let q: f64 = self.quad.iter().map(|&(i, c)| (z[i] - c) * (z[i] - c)).sum();
        let l: f64 = self.lin.iter().map(|&(i, a)| a * z[i]).sum();
        q + l + self.constant
    }

    /// Sparse gradient; indices may repeat.
    pub fn gradient(&self, z: &[f64]) -> Vec<(usize, f64)> {
        self.quad
            .iter()
            .map(|&(i, c)| (i, 2.0 * (z[i] - c)))
            .chain(self.lin.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub n: usize,
    pub hessian: SquareMatrix,
    pub linear: Vec<f64>,
    pub constant: f64,
    pub constraints: Vec<Constraint>,
}

impl Program {
    pub fn new(n: usize) -> Self {
        Program {
            n,
            hessian: SquareMatrix::zeros(n),
            linear: vec![0.0; n],
            constant: 0.0,
            constraints: Vec::new(),
        }
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        let pz = self.hessian.mul_vec(z);
        0.5 * math::dot(z, &pz) + math::dot(&self.linear, z) + self.constant
    }

    fn objective_gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.mul_vec(z);
        for (gi, qi) in g.iter_mut().zip(&self.linear) {
            *gi += qi;
        }
        g
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gradient of the Lagrangian.
    pub fn dual_residual(&self, z: &[f64], duals: &[f64]) -> Vec<f64> {
        let mut r = self.objective_gradient(z);
        for (c, &l) in self.constraints.iter().zip(duals) {
            for (i, g) in c.gradient(z) {
                r[i] += l * g;
            }
        }
        r
    }

    /// Max of stationarity, complementarity and primal infeasibility.
    pub fn kkt_residual(&self, z: &[f64], duals: &[f64]) -> f64 {
        let stationarity = math::max_abs(&self.dual_residual(z, duals));
        let mut comp: f64 = 0.0;
        let mut infeas: f64 = 0.0;
        for (c, &l) in self.constraints.iter().zip(duals) {
            let f = c.value(z);
            comp = comp.max((l * f).abs());
            infeas = infeas.max(f);
        }
        stationarity.max(comp).max(infeas)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmOptions {
    /// Target for `m / t`.
    pub gap_tol: f64,
    /// Newton decrement threshold for centering.
    pub center_tol: f64,
    pub max_iter: usize,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions { gap_tol: 1e-8, center_tol: 1e-10, max_iter: 500, mu: 10.0, alpha: 0.01, beta: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct IpmOutcome {
    pub z: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Duality gap `m / t` at the returned point.
    pub gap: f64,
}

fn barrier_value(prog: &Program, z: &[f64], t: f64) -> Option<f64> {
    let mut phi = t * prog.objective(z);
    for c in &prog.constraints {
        let f = c.value(z);
        if !(f < 0.0) {
            return None;
        }
        phi -= math::ln(-f);
    }
    Some(phi)
}

fn duals_at(prog: &Program, z: &[f64], t: f64) -> Vec<f64> {
    prog.constraints.iter().map(|c| 1.0 / (t * -c.value(z))).collect()
}

/// Takes the last centering Newton step `dz` and reads the duals off its
/// linearization, `(1 + g'dz / (-f)) / (t (-f))`, which satisfies
/// stationarity at `z + dz` exactly for linear constraints.
fn polish(prog: &Program, z: Vec<f64>, dz: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let zn: Vec<f64> = z.iter().zip(dz).map(|(a, b)| a + b).collect();
    if !(prog.max_violation(&zn) < 0.0) {
        let duals = duals_at(prog, &z, t);
        return (z, duals);
    }
    let duals = prog
        .constraints
        .iter()
        .map(|c| {
            let f = -c.value(&z);
            let gdz: f64 = c.gradient(&z).iter().map(|&(i, g)| g * dz[i]).sum();
            ((1.0 + gdz / f) / (t * f)).max(0.0)
        })
        .collect();
    (zn, duals)
}

/// Log-barrier interior-point method from a strictly feasible `z0`.
///
/// Each outer round centers `t f0 - sum log(-f_j)` with damped Newton steps,
/// then raises `t` by `mu`. Duals are read off the central path as
/// `1 / (t (-f_j))`. `stop_early` is checked after every Newton step.
pub(crate) fn solve(
    prog: &Program,
    z0: Vec<f64>,
    opts: &IpmOptions,
    stop_early: Option<&dyn Fn(&[f64]) -> bool>,
) -> IpmOutcome {
    let m = prog.constraints.len();
    let mut z = z0;
    debug_assert!(prog.max_violation(&z) < 0.0 || m == 0, "starting point must be strictly feasible");
    let mut t: f64 = 1.0;
    let mut iterations = 0;
    let finish = |z: Vec<f64>, t: f64, iterations: usize, converged: bool| {
        let duals = duals_at(prog, &z, t);
        let gap = m as f64 / t;
        IpmOutcome { z, duals, iterations, converged, gap }
    };

    loop {
        // centering
        let mut centered = false;
        let mut last_step: Vec<f64> = Vec::new();
        while iterations < opts.max_iter {
            iterations += 1;
            let mut grad: Vec<f64> = prog.objective_gradient(&z).iter().map(|g| t * g).collect();
            let mut h = prog.hessian.clone();
            for v in h.data.iter_mut() {
                *v *= t;
            }
            for c in &prog.constraints {
                let f = c.value(&z);
                let inv = 1.0 / -f;
                let g = c.gradient(&z);
                for &(i, _) in &c.quad {
                    h.add(i, i, 2.0 * inv);
                }
                for &(a, ga) in &g {
                    grad[a] += ga * inv;
                    for &(b, gb) in &g {
                        h.add(a, b, ga * gb * inv * inv);
                    }
                }
            }
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let dz = match linalg::solve_spd(&h, &neg) {
                Some(dz) => dz,
                None => return finish(z, t, iterations, false),
            };
            let decrement = -math::dot(&grad, &dz);
            let tiny = math::max_abs(&dz) <= 1e-14 * (1.0 + math::max_abs(&z));
            if decrement / 2.0 <= opts.center_tol || tiny {
                centered = true;
                last_step = dz;
                break;
            }

            let mut step = 1.0;
            let phi0 = barrier_value(prog, &z, t).unwrap_or(f64::INFINITY);
            // inside the quadratic-convergence region a full step only has to stay feasible
            let quadratic = decrement < 0.25;
            let mut moved = false;
            while step > 1e-20 {
                let zn: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + step * b).collect();
                if let Some(phi) = barrier_value(prog, &zn, t) {
                    if quadratic || phi <= phi0 - opts.alpha * step * decrement {
                        z = zn;
                        moved = true;
                        break;
                    }
                }
                step *= opts.beta;
            }
            if let Some(stop) = stop_early {
                if stop(&z) {
                    return finish(z, t, iterations, false);
                }
            }
            if !moved {
                // no measurable progress left at this t
                centered = true;
                last_step = dz;
                break;
            }
        }
        if !centered {
            return finish(z, t, iterations, false);
        }
        if m == 0 || (m as f64) / t <= opts.gap_tol {
            let (z, duals) = polish(prog, z, &last_step, t);
            return IpmOutcome { z, duals, iterations, converged: true, gap: m as f64 / t };
        }
        t *= opts.mu;
    }
}

/// Result of searching for a strictly feasible point.
#[derive(Debug, Clone)]
pub(crate) enum PhaseOne {
    Feasible(Vec<f64>),
    /// Certified: the max-constraint minimum is positive.
    Infeasible,
    /// No strictly feasible point found within the iteration cap.
    Undecided,
}

/// Minimizes `s` subject to `f_j(z) <= s` starting from any `z0`.
pub(crate) fn phase_one(prog: &Program, z0: &[f64], opts: &IpmOptions) -> PhaseOne {
    const MARGIN: f64 = 1e-4;
    let start = prog.max_violation(z0);
    if start < -MARGIN {
        return PhaseOne::Feasible(z0.to_vec());
    }
    let n = prog.n;
    let mut aux = Program::new(n + 1);
    aux.linear[n] = 1.0;
    aux.constraints = prog
        .constraints
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.lin.push((n, -1.0));
            c
        })
        .collect();
    let mut w0 = z0.to_vec();
    w0.push(start.max(0.0) + 1.0);

    let stop = |w: &[f64]| prog.max_violation(&w[..n]) < -MARGIN;
    let out = solve(&aux, w0, opts, Some(&stop));
    let z = out.z[..n].to_vec();
    let worst = prog.max_violation(&z);
    if worst < 0.0 {
        PhaseOne::Feasible(z)
    } else if out.converged && out.z[n] - out.gap > 0.0 {
        PhaseOne::Infeasible
    } else if out.converged {
        // optimum of the auxiliary problem sits on zero: no interior
        PhaseOne::Infeasible
    } else {
        PhaseOne::Undecided
    }
}
