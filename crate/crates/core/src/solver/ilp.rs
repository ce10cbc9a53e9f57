use super::{meets_min_rate, objective, strictly_better, AllocationProblem, Solution, SolverError};

/// Exact 0/1 allocation for a fixed packet subset by depth-first
/// branch-and-bound over RB owners.
///
/// Every RB is handed to some packet: rates are nonnegative, so an unowned RB
/// can always be given away without lowering the objective or breaking a
/// minimum-rate constraint. Each packet therefore has to win at least one RB.
pub fn solve_ilp_subset(problem: &AllocationProblem) -> Result<Solution, SolverError> {
    problem.validate()?;
    let n = problem.demands.len();
    let k = problem.rbs;
    let weights: Vec<f64> = problem.demands.iter().map(|d| d.weight()).collect();

    // suffix_rate[i][j]: rate packet i could still collect from RBs j..K
    let mut suffix_rate = vec![vec![0.0; k + 1]; n];
    for (i, d) in problem.demands.iter().enumerate() {
        for j in (0..k).rev() {
            suffix_rate[i][j] = suffix_rate[i][j + 1] + d.rates[j];
        }
    }
    // suffix_best[j]: best reward rate obtainable from RBs j..K ignoring constraints
    let mut suffix_best = vec![0.0; k + 1];
    for j in (0..k).rev() {
        let best = (0..n)
            .map(|i| weights[i] * problem.demands[i].rates[j])
            .fold(0.0, f64::max);
        suffix_best[j] = suffix_best[j + 1] + best;
    }
    // owner trial order per RB: highest reward rate first, ties by position
    let order: Vec<Vec<usize>> = (0..k)
        .map(|j| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                let va = weights[a] * problem.demands[a].rates[j];
                let vb = weights[b] * problem.demands[b].rates[j];
                vb.total_cmp(&va).then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut search = Search {
        problem,
        weights: &weights,
        suffix_rate: &suffix_rate,
        suffix_best: &suffix_best,
        order: &order,
        owner: vec![0; k],
        acc: vec![0.0; n],
        best: None,
    };
    search.descend(0, 0.0);

    let owners = search.best.map(|(owners, _)| owners).ok_or(SolverError::Infeasible)?;
    let mut allocations = vec![vec![0.0; k]; n];
    for (j, &i) in owners.iter().enumerate() {
        allocations[i][j] = 1.0;
    }
    let total_rr = objective(problem, &allocations);
    Ok(Solution { allocations, total_rr })
}

struct Search<'a> {
    problem: &'a AllocationProblem,
    weights: &'a [f64],
    suffix_rate: &'a [Vec<f64>],
    suffix_best: &'a [f64],
    order: &'a [Vec<usize>],
    owner: Vec<usize>,
    acc: Vec<f64>,
    best: Option<(Vec<usize>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, rb: usize, value: f64) {
        let demands = &self.problem.demands;
        // some packet can no longer reach its minimum rate
        for (i, d) in demands.iter().enumerate() {
            if !meets_min_rate(self.acc[i] + self.suffix_rate[i][rb], d.min_rate, 0.0) {
                return;
            }
        }
        if let Some((_, best)) = &self.best {
            if !strictly_better(value + self.suffix_best[rb], *best) {
                return;
            }
        }
        if rb == self.problem.rbs {
            self.best = Some((self.owner.clone(), value));
            return;
        }
        for t in 0..self.order[rb].len() {
            let i = self.order[rb][t];
            let r = demands[i].rates[rb];
            self.owner[rb] = i;
            self.acc[i] += r;
            self.descend(rb + 1, value + self.weights[i] * r);
            self.acc[i] -= r;
        }
    }
}
