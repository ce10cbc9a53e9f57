use super::simplex::{maximize, LpError};
use super::{meets_min_rate, validate_demand, Demand, Solution, SolverError, FEASIBILITY_SLACK};

/// Two-packet time-domain relaxation.
///
/// With the second packet taking whatever share of each RB the first leaves
/// (`x₂ = 1 − x₁`), the problem reduces to
///
/// ```text
/// max  x₁ᵀ((w₁/l₁)r₁ − (w₂/l₂)r₂) + (w₂/l₂)·1ᵀr₂
/// s.t. x₁ᵀr₁ ≥ r₁,min
///      (1 − x₁)ᵀr₂ ≥ r₂,min
///      0 ≤ x₁ ≤ 1
/// ```
///
/// solved exactly by simplex. The returned allocations are `[x₁, 1 − x₁]`.
pub fn solve_lp2(first: &Demand, second: &Demand, rbs: usize) -> Result<Solution, SolverError> {
    validate_demand(first, rbs)?;
    validate_demand(second, rbs)?;
    if rbs == 0 {
        return Err(SolverError::InvalidProblem("no resource blocks".into()));
    }
    let (w1, w2) = (first.weight(), second.weight());
    let total2 = second.total_rate();
    if !meets_min_rate(first.total_rate(), first.min_rate, FEASIBILITY_SLACK)
        || !meets_min_rate(total2, second.min_rate, FEASIBILITY_SLACK)
    {
        return Err(SolverError::Infeasible);
    }

    let c: Vec<f64> = (0..rbs).map(|k| w1 * first.rates[k] - w2 * second.rates[k]).collect();
    let mut a = Vec::with_capacity(rbs + 2);
    let mut b = Vec::with_capacity(rbs + 2);
    for k in 0..rbs {
        let mut row = vec![0.0; rbs];
        row[k] = 1.0;
        a.push(row);
        b.push(1.0);
    }
    a.push(first.rates.iter().map(|r| -r).collect());
    b.push(-first.min_rate);
    a.push(second.rates.clone());
    b.push(total2 - second.min_rate);

    let lp = match maximize(&c, &a, &b) {
        Ok(lp) => lp,
        Err(LpError::Infeasible) => return Err(SolverError::Infeasible),
        Err(LpError::Unbounded) => unreachable!("box-constrained program cannot be unbounded"),
    };
    let x1: Vec<f64> = lp.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let x2: Vec<f64> = x1.iter().map(|v| 1.0 - v).collect();
    let rate1: f64 = x1.iter().zip(&first.rates).map(|(x, r)| x * r).sum();
    let rate2: f64 = x2.iter().zip(&second.rates).map(|(x, r)| x * r).sum();
    if !meets_min_rate(rate1, first.min_rate, FEASIBILITY_SLACK)
        || !meets_min_rate(rate2, second.min_rate, FEASIBILITY_SLACK)
    {
        return Err(SolverError::Infeasible);
    }
    let total_rr = w1 * rate1 + w2 * rate2;
    Ok(Solution {
        allocations: vec![x1, x2],
        total_rr,
    })
}
