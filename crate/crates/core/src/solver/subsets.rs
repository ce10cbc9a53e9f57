use super::{strictly_better, ties, AllocationProblem, Demand, Solution, SolverError};
use crate::model::PacketId;

/// A chosen packet subset and its allocation. `members` index into the
/// eligible list passed to the search.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetChoice {
    pub members: Vec<usize>,
    pub allocations: Vec<Vec<f64>>,
    pub total_rr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubsetSearch {
    pub best: Option<SubsetChoice>,
    /// Subsets handed to the solver.
    pub solver_calls: usize,
    /// Subsets skipped because they contain an infeasible subset.
    pub pruned: usize,
}

/// Searches subsets of at most `max_size` packets in ascending size order,
/// skipping every superset of a subset already found infeasible, and returns
/// the one with the largest total reward rate. Ties go to the
/// lexicographically smallest packet-id set.
pub fn enumerate_subsets_pruned<F>(eligible: &[Demand], rbs: usize, max_size: usize, mut solver: F) -> SubsetSearch
where
    F: FnMut(&AllocationProblem) -> Result<Solution, SolverError>,
{
    assert!(max_size >= 1, "subset size bound must be at least one");
    assert!(eligible.len() <= 64, "at most 64 eligible packets");
    // positions sorted by packet id so combinations come out lexicographic
    let mut by_id: Vec<usize> = (0..eligible.len()).collect();
    by_id.sort_by_key(|&i| eligible[i].id);

    let mut out = SubsetSearch::default();
    let mut infeasible: Vec<u64> = Vec::new();
    let n = eligible.len();
    for size in 1..=max_size.min(n) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let mask = combo.iter().fold(0u64, |m, &c| m | 1 << c);
            if infeasible.iter().any(|&bad| bad & mask == bad) {
                out.pruned += 1;
            } else {
                let members: Vec<usize> = combo.iter().map(|&c| by_id[c]).collect();
                let problem = AllocationProblem {
                    demands: members.iter().map(|&i| eligible[i].clone()).collect(),
                    rbs,
                };
                out.solver_calls += 1;
                match solver(&problem) {
                    Ok(sol) => consider(&mut out.best, eligible, members, sol),
                    Err(_) => infeasible.push(mask),
                }
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    out
}

pub(crate) fn consider(best: &mut Option<SubsetChoice>, eligible: &[Demand], members: Vec<usize>, sol: Solution) {
    let replace = match best {
        None => true,
        Some(b) => {
            strictly_better(sol.total_rr, b.total_rr)
                || (ties(sol.total_rr, b.total_rr) && id_set(eligible, &members) < id_set(eligible, &b.members))
        }
    };
    if replace {
        *best = Some(SubsetChoice {
            members,
            allocations: sol.allocations,
            total_rr: sol.total_rr,
        });
    }
}

fn id_set(eligible: &[Demand], members: &[usize]) -> Vec<PacketId> {
    let mut ids: Vec<PacketId> = members.iter().map(|&i| eligible[i].id).collect();
    ids.sort();
    ids
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
