//! Exact and relaxed optimizers for the maximal-reward-rate allocation
//! problem, plus the brute-force oracles used as ground truth in tests and in
//! `mrrsched verify`.
//!
//! A handful of packets compete for `K` resource blocks and each must reach
//! its minimum rate. An RB goes to at most one packet, except that the
//! two-packet LP may time-share it. The objective is `Σ (w/l)·xᵀr`.

mod ilp;
mod lp2;
pub mod oracle;
mod partition;
pub mod simplex;
mod subsets;

pub use ilp::solve_ilp_subset;
pub use lp2::solve_lp2;
pub use partition::{partition_feasibility, FeasibilityQuery};
pub use subsets::{enumerate_subsets_pruned, SubsetChoice, SubsetSearch};

use crate::model::PacketId;
use thiserror::Error;

/// Relative tolerance for deciding that two objective values tie.
pub const OBJECTIVE_TIE_TOL: f64 = 1e-9;

/// Relative slack allowed on the minimum-rate constraints of relaxed (LP)
/// solutions.
pub const FEASIBILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("no allocation meets every minimum rate")]
    Infeasible,
    #[error("instance too large for exhaustive search: {cells} cells, limit {limit}")]
    InstanceTooLarge { cells: usize, limit: usize },
    #[error("integer list has an odd sum; no partition reduction exists")]
    OddSum,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// One packet's view of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub id: PacketId,
    pub reward: f64,
    pub length_bits: f64,
    pub rates: Vec<f64>,
    pub min_rate: f64,
}

impl Demand {
    /// Reward per bit.
    pub fn weight(&self) -> f64 {
        self.reward / self.length_bits
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    pub demands: Vec<Demand>,
    pub rbs: usize,
}

impl AllocationProblem {
    pub fn new(demands: Vec<Demand>, rbs: usize) -> Result<Self, SolverError> {
        let problem = AllocationProblem { demands, rbs };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.demands.is_empty() {
            return Err(SolverError::InvalidProblem("no packets".into()));
        }
        for d in &self.demands {
            validate_demand(d, self.rbs)?;
        }
        Ok(())
    }
}

pub(crate) fn validate_demand(d: &Demand, rbs: usize) -> Result<(), SolverError> {
    if d.rates.len() != rbs {
        return Err(SolverError::InvalidProblem(format!(
            "packet {} has {} rates, expected {rbs}",
            d.id,
            d.rates.len()
        )));
    }
    if !(d.min_rate > 0.0 && d.min_rate.is_finite()) {
        return Err(SolverError::InvalidProblem(format!(
            "packet {} has minimum rate {}",
            d.id, d.min_rate
        )));
    }
    if !(d.length_bits > 0.0) || !(d.reward >= 0.0) {
        return Err(SolverError::InvalidProblem(format!("packet {} has bad length or reward", d.id)));
    }
    if d.rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(SolverError::InvalidProblem(format!("packet {} has a negative rate", d.id)));
    }
    Ok(())
}

/// A feasible allocation: one `x` vector per demand, in problem order.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub allocations: Vec<Vec<f64>>,
    pub total_rr: f64,
}

impl Solution {
    /// Asserts the allocation constraints: per-RB sum at most one and every
    /// demand at or above its minimum rate, with relative slack `slack`.
    pub fn check(&self, problem: &AllocationProblem, slack: f64) -> Result<(), String> {
        for k in 0..problem.rbs {
            let s: f64 = self.allocations.iter().map(|x| x[k]).sum();
            if s > 1.0 + 1e-9 {
                return Err(format!("RB {k} over-allocated: {s}"));
            }
        }
        for (d, x) in problem.demands.iter().zip(&self.allocations) {
            if x.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
                return Err(format!("packet {} allocation out of [0,1]", d.id));
            }
            let rate = crate::model::dot(x, &d.rates);
            if !meets_min_rate(rate, d.min_rate, slack) {
                return Err(format!("packet {} rate {rate} below minimum {}", d.id, d.min_rate));
            }
        }
        Ok(())
    }
}

/// Exact-arithmetic feasibility test used by the 0/1 solvers and oracles.
pub(crate) fn meets_min_rate(rate: f64, min_rate: f64, slack: f64) -> bool {
    rate >= min_rate - slack * min_rate.abs().max(1.0) - 1e-12 * min_rate.abs()
}

/// True when `candidate` beats `incumbent` by more than the tie tolerance.
pub(crate) fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + OBJECTIVE_TIE_TOL * candidate.abs().max(incumbent.abs())
}

pub(crate) fn ties(a: f64, b: f64) -> bool {
    !strictly_better(a, b) && !strictly_better(b, a)
}

pub(crate) fn objective(problem: &AllocationProblem, allocations: &[Vec<f64>]) -> f64 {
    problem
        .demands
        .iter()
        .zip(allocations)
        .map(|(d, x)| d.weight() * crate::model::dot(x, &d.rates))
        .sum()
}
