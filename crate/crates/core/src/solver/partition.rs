use super::{solve_ilp_subset, AllocationProblem, Demand, SolverError};
use crate::model::PacketId;

/// "Is there an allocation with total reward rate at least `alpha`?"
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityQuery {
    pub problem: AllocationProblem,
    pub alpha: f64,
}

impl FeasibilityQuery {
    pub fn new(problem: AllocationProblem, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "threshold must be nonnegative");
        FeasibilityQuery { problem, alpha }
    }

    /// True when the set of allocations reaching `alpha` is non-empty.
    pub fn has_solution(&self) -> Result<bool, SolverError> {
        match solve_ilp_subset(&self.problem) {
            Ok(s) => Ok(s.total_rr >= self.alpha),
            Err(SolverError::Infeasible) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Decides integer partition through the allocation problem: two unit-weight
/// packets see the integers as RB rates and each needs half the total.
pub fn partition_feasibility(values: &[u64]) -> Result<bool, SolverError> {
    if values.is_empty() || values.contains(&0) {
        return Err(SolverError::InvalidProblem("partition needs positive integers".into()));
    }
    let total: u64 = values.iter().sum();
    if total % 2 == 1 {
        return Err(SolverError::OddSum);
    }
    let rates: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let half = total as f64 / 2.0;
    let packet = |id| Demand {
        id: PacketId(id),
        reward: 1.0,
        length_bits: 1.0,
        rates: rates.clone(),
        min_rate: half,
    };
    let query = FeasibilityQuery::new(AllocationProblem::new(vec![packet(1), packet(2)], values.len())?, 0.0);
    query.has_solution()
}
