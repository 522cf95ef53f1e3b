//! Small dense symmetric solves for the Newton systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| math::dot(&self.data[i * self.n..(i + 1) * self.n], x)).collect()
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }
}

/// In-place Cholesky factorization, lower triangle. Returns false if the
/// matrix is not numerically positive definite.
fn cholesky(a: &mut SquareMatrix) -> bool {
    let n = a.n;
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let l = a.get(j, k);
            d -= l * l;
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = math::sqrt(d);
        a.data[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= a.get(i, k) * a.get(j, k);
            }
            a.data[i * n + j] = s / d;
        }
    }
    true
}

fn cholesky_solve(l: &SquareMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

/// Solves `A x = b` for symmetric positive semidefinite `A`, adding a growing
/// diagonal shift until the factorization succeeds.
pub(crate) fn solve_spd(a: &SquareMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let scale = a.max_diag().max(1.0);
    let mut shift = 0.0;
    for attempt in 0..12 {
        let mut work = a.clone();
        if shift > 0.0 {
            for i in 0..a.n {
                work.add(i, i, shift);
            }
        }
        if cholesky(&mut work) {
            let x = cholesky_solve(&work, b);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        shift = scale * 1e-14 * math::pow(100.0, attempt as f64);
    }
    None
}
