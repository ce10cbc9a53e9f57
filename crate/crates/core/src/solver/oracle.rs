//! Brute-force ground truth. None of these share code paths with the
//! production solvers beyond the problem types and the feasibility predicate.

use super::subsets::{consider, next_combination};
use super::{
    meets_min_rate, objective, strictly_better, validate_demand, AllocationProblem, Demand, Solution, SolverError,
    SubsetChoice, FEASIBILITY_SLACK,
};

/// Largest `K · n` the exhaustive ILP oracle accepts.
pub const ILP_ORACLE_MAX_CELLS: usize = 16;

/// Exact optimum of the 0/1 allocation problem by enumerating all
/// `2^(K·n)` assignment matrices, including ones that leave RBs unused.
pub fn ilp_exhaustive_oracle(problem: &AllocationProblem) -> Result<Solution, SolverError> {
    problem.validate()?;
    let n = problem.demands.len();
    let k = problem.rbs;
    let cells = n * k;
    if cells > ILP_ORACLE_MAX_CELLS {
        return Err(SolverError::InstanceTooLarge {
            cells,
            limit: ILP_ORACLE_MAX_CELLS,
        });
    }
    let mut best: Option<(u64, f64)> = None;
    'mask: for mask in 0u64..1 << cells {
        let bit = |i: usize, j: usize| mask >> (i * k + j) & 1 == 1;
        for j in 0..k {
            if (0..n).filter(|&i| bit(i, j)).count() > 1 {
                continue 'mask;
            }
        }
        let mut value = 0.0;
        for (i, d) in problem.demands.iter().enumerate() {
            let rate: f64 = (0..k).filter(|&j| bit(i, j)).map(|j| d.rates[j]).sum();
            if !meets_min_rate(rate, d.min_rate, 0.0) {
                continue 'mask;
            }
            value += d.weight() * rate;
        }
        if best.is_none_or(|(_, b)| strictly_better(value, b)) {
            best = Some((mask, value));
        }
    }
    let (mask, _) = best.ok_or(SolverError::Infeasible)?;
    let allocations: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|j| (mask >> (i * k + j) & 1) as f64).collect())
        .collect();
    let total_rr = objective(problem, &allocations);
    Ok(Solution { allocations, total_rr })
}

/// Every subset of at most `max_size` packets, no pruning. Same tie rule as
/// [`super::enumerate_subsets_pruned`].
pub fn enumerate_subsets_unpruned<F>(eligible: &[Demand], rbs: usize, max_size: usize, mut solver: F) -> Option<SubsetChoice>
where
    F: FnMut(&AllocationProblem) -> Result<Solution, SolverError>,
{
    let n = eligible.len();
    let mut best = None;
    for size in 1..=max_size.min(n) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let problem = AllocationProblem {
                demands: combo.iter().map(|&i| eligible[i].clone()).collect(),
                rbs,
            };
            if let Ok(sol) = solver(&problem) {
                consider(&mut best, eligible, combo.clone(), sol);
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    best
}

/// Best point of the grid `{0, step, 2·step, …, 1}^K` for the two-packet
/// relaxation, with both minimum-rate constraints allowed `1e-6` relative
/// slack. Exact over the grid: a depth-first search whose bounds come from
/// dropping one of the two coupling constraints and solving the remaining
/// single-constraint box problem greedily.
pub fn lp2_grid_oracle(first: &Demand, second: &Demand, rbs: usize, step: f64) -> Result<Solution, SolverError> {
    validate_demand(first, rbs)?;
    validate_demand(second, rbs)?;
    if rbs == 0 || rbs > 5 {
        return Err(SolverError::InvalidProblem(format!("grid oracle needs 1 ≤ K ≤ 5, got {rbs}")));
    }
    if !(0.01 - 1e-12..=1.0).contains(&step) {
        return Err(SolverError::InvalidProblem(format!("grid step {step} below 0.01")));
    }
    let levels = (1.0 / step).round() as usize;
    let (w1, w2) = (first.weight(), second.weight());
    let gain: Vec<f64> = (0..rbs).map(|k| w1 * first.rates[k] - w2 * second.rates[k]).collect();
    let need1 = first.min_rate - FEASIBILITY_SLACK * first.min_rate.max(1.0);
    let cap2 = second.total_rate() - second.min_rate + FEASIBILITY_SLACK * second.min_rate.max(1.0);

    let mut grid = GridSearch {
        r1: &first.rates,
        r2: &second.rates,
        gain: &gain,
        need1,
        cap2,
        levels,
        x: vec![0.0; rbs],
        best: None,
    };
    grid.descend(0, 0.0, 0.0, 0.0);
    let (x1, _) = grid.best.ok_or(SolverError::Infeasible)?;
    let x2: Vec<f64> = x1.iter().map(|v| 1.0 - v).collect();
    let total_rr = w1 * dot(&x1, &first.rates) + w2 * dot(&x2, &second.rates);
    Ok(Solution {
        allocations: vec![x1, x2],
        total_rr,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct GridSearch<'a> {
    r1: &'a [f64],
    r2: &'a [f64],
    gain: &'a [f64],
    need1: f64,
    cap2: f64,
    levels: usize,
    x: Vec<f64>,
    best: Option<(Vec<f64>, f64)>,
}

impl GridSearch<'_> {
    fn descend(&mut self, k: usize, value: f64, used1: f64, used2: f64) {
        if used2 > self.cap2 {
            return;
        }
        let rest = k..self.r1.len();
        let Some(bound) = self.upper_bound(rest, used1, used2) else {
            return;
        };
        if let Some((_, best)) = &self.best {
            if value + bound <= *best {
                return;
            }
        }
        if k == self.r1.len() {
            if used1 >= self.need1 {
                self.best = Some((self.x.clone(), value));
            }
            return;
        }
        let values: Vec<usize> = if self.gain[k] >= 0.0 {
            (0..=self.levels).rev().collect()
        } else {
            (0..=self.levels).collect()
        };
        for j in values {
            let v = j as f64 / self.levels as f64;
            self.x[k] = v;
            self.descend(
                k + 1,
                value + v * self.gain[k],
                used1 + v * self.r1[k],
                used2 + v * self.r2[k],
            );
        }
        self.x[k] = 0.0;
    }

    /// Upper bound on the gain collectable from coordinates `rest`, or `None`
    /// when they cannot restore feasibility.
    fn upper_bound(&self, rest: std::ops::Range<usize>, used1: f64, used2: f64) -> Option<f64> {
        let idx: Vec<usize> = rest.collect();
        let reachable1: f64 = idx.iter().map(|&k| self.r1[k]).sum();
        if used1 + reachable1 < self.need1 {
            return None;
        }
        // drop the packing constraint: take every positive gain, then buy the
        // missing first-packet rate as cheaply as possible
        let mut covered = used1;
        let mut bound_a = 0.0;
        for &k in &idx {
            if self.gain[k] > 0.0 {
                bound_a += self.gain[k];
                covered += self.r1[k];
            }
        }
        if covered < self.need1 {
            let mut cheap: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&k| self.gain[k] <= 0.0 && self.r1[k] > 0.0)
                .collect();
            cheap.sort_by(|&a, &b| (-self.gain[a] / self.r1[a]).total_cmp(&(-self.gain[b] / self.r1[b])));
            for k in cheap {
                let missing = self.need1 - covered;
                if missing <= 0.0 {
                    break;
                }
                let take = (missing / self.r1[k]).min(1.0);
                bound_a += take * self.gain[k];
                covered += take * self.r1[k];
            }
        }
        // drop the covering constraint: fractional knapsack on positive gains
        let mut room = self.cap2 - used2;
        let mut bound_b = 0.0;
        let mut items: Vec<usize> = idx.iter().copied().filter(|&k| self.gain[k] > 0.0).collect();
        items.sort_by(|&a, &b| {
            let ra = if self.r2[a] == 0.0 { f64::INFINITY } else { self.gain[a] / self.r2[a] };
            let rb = if self.r2[b] == 0.0 { f64::INFINITY } else { self.gain[b] / self.r2[b] };
            rb.total_cmp(&ra)
        });
        for k in items {
            if self.r2[k] == 0.0 {
                bound_b += self.gain[k];
                continue;
            }
            if room <= 0.0 {
                break;
            }
            let take = (room / self.r2[k]).min(1.0);
            bound_b += take * self.gain[k];
            room -= take * self.r2[k];
        }
        Some(bound_a.min(bound_b) + 1e-9 * (bound_a.abs() + 1.0))
    }
}

/// Whether the integers split into two halves of equal sum, by subset-sum
/// dynamic programming.
pub fn subset_sum_partition(values: &[u64]) -> Result<bool, SolverError> {
    let total: u64 = values.iter().sum();
    if total % 2 == 1 {
        return Err(SolverError::OddSum);
    }
    let half = (total / 2) as usize;
    let mut reachable = vec![false; half + 1];
    reachable[0] = true;
    for &v in values {
        let v = v as usize;
        for s in (v..=half).rev() {
            if reachable[s - v] {
                reachable[s] = true;
            }
        }
    }
    Ok(reachable[half])
}
