//! Exhaustive search over per-node update counts and their interleavings.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds;
use crate::qp::{self, SchedulePolicy, SolveError, SolveStatus, TrajectorySolution};
use crate::scenario::Scenario;

pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumerationError {
    #[error("schedule count exceeds 2^63")]
    Overflow,
    #[error("enumeration needs {required} solves, budget is {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Number of distinct interleavings `(sum n)! / prod n_m!`.
pub fn schedule_count(counts: &[usize]) -> Result<u64, EnumerationError> {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &n in counts {
        // acc * binom(total + n, n), built one exact factor at a time
        for k in 1..=n as u128 {
            total += 1;
            acc = acc * total / k;
            if acc > i64::MAX as u128 {
                return Err(EnumerationError::Overflow);
            }
        }
    }
    Ok(acc as u64)
}

/// Exact multinomial for counts whose result does not fit a `u64`.
pub fn schedule_count_big(counts: &[usize]) -> BigUint {
    let mut acc = BigUint::from(1u32);
    let mut total = 0u64;
    for &n in counts {
        for k in 1..=n as u64 {
            total += 1;
            acc *= total;
            acc /= k;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumeratorConfig {
    /// Largest total number of updates considered; `None` means `sum n_bar`.
    pub cap: Option<usize>,
    /// Also enumerate `n_m = 0` for every node.
    pub include_zero: bool,
    /// Maximum number of schedules to solve.
    pub budget: u64,
    pub tol: f64,
}

impl Default for EnumeratorConfig {
    fn default() -> Self {
        EnumeratorConfig { cap: None, include_zero: true, budget: DEFAULT_BUDGET, tol: qp::DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub policy: SchedulePolicy,
    pub counts: Vec<usize>,
    pub objective: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub best: TrajectorySolution,
    /// Every evaluated schedule in enumeration order.
    pub table: Vec<TableRow>,
}

impl Enumeration {
    pub fn best_policy(&self) -> &SchedulePolicy {
        &self.best.policy
    }

    pub fn best_objective(&self) -> f64 {
        self.best.objective
    }
}

/// All count vectors in the search grid, lexicographic.
pub fn count_grid(s: &Scenario, cfg: &EnumeratorConfig) -> Vec<Vec<usize>> {
    let n_bar = bounds::max_update_counts(s);
    let cap = cfg.cap.unwrap_or_else(|| n_bar.iter().sum());
    let lo = if cfg.include_zero { 0 } else { 1 };
    let mut out = Vec::new();
    if n_bar.iter().any(|&n| n < lo) {
        return out;
    }
    let mut cur: Vec<usize> = vec![lo; n_bar.len()];
    loop {
        if cur.iter().sum::<usize>() <= cap {
            out.push(cur.clone());
        }
        // odometer increment, last node fastest
        let mut k = n_bar.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < n_bar[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo;
        }
    }
}

/// Every distinct ordering of a multiset with the given counts, lexicographic.
pub fn interleavings(counts: &[usize]) -> Vec<SchedulePolicy> {
    let mut seq: Vec<usize> = counts.iter().enumerate().flat_map(|(m, &n)| core::iter::repeat_n(m, n)).collect();
    let mut out = vec![SchedulePolicy::new(seq.clone())];
    while next_permutation(&mut seq) {
        out.push(SchedulePolicy::new(seq.clone()));
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Total schedules the grid would require.
pub fn required_solves(s: &Scenario, cfg: &EnumeratorConfig) -> BigUint {
    count_grid(s, cfg).iter().map(|c| schedule_count_big(c)).sum()
}

fn better(a: &TrajectorySolution, b: &TrajectorySolution) -> bool {
    match a.objective.total_cmp(&b.objective) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.policy < b.policy,
    }
}

/// Solves every schedule in the grid and returns the exact optimum. Ties go to
/// the lexicographically smallest schedule.
pub fn enumerate_optimal(s: &Scenario, cfg: &EnumeratorConfig) -> Result<Enumeration, EnumerationError> {
    let required = required_solves(s, cfg);
    if required > BigUint::from(cfg.budget) {
        return Err(EnumerationError::BudgetExceeded { required, budget: cfg.budget });
    }
    let candidates: Vec<SchedulePolicy> = count_grid(s, cfg).iter().flat_map(|c| interleavings(c)).collect();
    let solutions = solve_all(s, &candidates, cfg.tol)?;

    let num_nodes = s.num_nodes();
    let mut best: Option<&TrajectorySolution> = None;
    for sol in &solutions {
        if sol.status == SolveStatus::Optimal && best.is_none_or(|b| better(sol, b)) {
            best = Some(sol);
        }
    }
    let best = match best {
        Some(b) => b.clone(),
        None => qp::solve_schedule(s, &SchedulePolicy::empty(), cfg.tol)?,
    };
    let table = solutions
        .into_iter()
        .map(|sol| TableRow { counts: sol.policy.counts(num_nodes), policy: sol.policy, objective: sol.objective, status: sol.status })
        .collect();
    Ok(Enumeration { best, table })
}

#[cfg(feature = "parallel")]
fn solve_all(s: &Scenario, candidates: &[SchedulePolicy], tol: f64) -> Result<Vec<TrajectorySolution>, SolveError> {
    use rayon::prelude::*;
    candidates.par_iter().map(|u| qp::solve_schedule(s, u, tol)).collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_all(s: &Scenario, candidates: &[SchedulePolicy], tol: f64) -> Result<Vec<TrajectorySolution>, SolveError> {
    candidates.iter().map(|u| qp::solve_schedule(s, u, tol)).collect()
}

/// Best NWAoI with exactly `n` updates of `node`, for `n = 0..=n_bar`.
/// Entry 0 is the empty schedule.
pub fn per_count_best(s: &Scenario, node: usize) -> Result<Vec<f64>, EnumerationError> {
    let n_bar = bounds::max_updates(s, node);
    let policies: Vec<SchedulePolicy> = (0..=n_bar).map(|n| SchedulePolicy::new(vec![node; n])).collect();
    let solutions = solve_all(s, &policies, qp::DEFAULT_TOL)?;
    Ok(solutions.into_iter().map(|sol| sol.objective).collect())
}
