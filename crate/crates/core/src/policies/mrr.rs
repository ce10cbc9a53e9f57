use super::{Candidate, PolicyError, SchedContext, ScheduleDecision};
use crate::model::{adjusted_min_rate, min_rate, Allocation, PacketId};
use crate::solver::{enumerate_subsets_pruned, solve_ilp_subset, solve_lp2, Demand, SolverError, OBJECTIVE_TIE_TOL};

/// LP shares this close to 0 or 1 are snapped to it.
const SHARE_SNAP: f64 = 1e-9;

fn demand(c: &Candidate, free: &[usize], min_rate: f64) -> Demand {
    Demand {
        id: c.packet.id,
        reward: c.packet.reward,
        length_bits: c.packet.length_bits as f64,
        rates: free.iter().map(|&k| c.rates[k]).collect(),
        min_rate,
    }
}

fn expand(owner: PacketId, x: &[f64], free: &[usize], rbs: usize) -> Allocation {
    let mut full = vec![0.0; rbs];
    for (&k, &v) in free.iter().zip(x) {
        full[k] = v;
    }
    Allocation::new(owner, full)
}

fn snap(v: f64) -> f64 {
    if v < SHARE_SNAP {
        0.0
    } else if v > 1.0 - SHARE_SNAP {
        1.0
    } else {
        v
    }
}

fn plain_min_rate(c: &Candidate, now: u64) -> Option<f64> {
    min_rate(c.packet.length_bits as f64, c.packet.expiry, now).ok()
}

#[derive(Default)]
struct Best {
    ids: Vec<PacketId>,
    decision: Option<ScheduleDecision>,
}

impl Best {
    fn offer(&mut self, d: ScheduleDecision) {
        let replace = match &self.decision {
            None => true,
            Some(b) => {
                let tol = OBJECTIVE_TIE_TOL * d.total_rr.abs().max(b.total_rr.abs());
                d.total_rr > b.total_rr + tol || (d.total_rr >= b.total_rr - tol && d.chosen < self.ids)
            }
        };
        if replace {
            self.ids = d.chosen.clone();
            self.decision = Some(d);
        }
    }
}

/// Solves the pair LP with the earlier-expiry packet first. The later packet
/// is first given its plain minimum rate; if an RB ends up shared without
/// two subframes of spare time for the later packet, the LP is re-solved
/// with the later packet's deadline shortened by two subframes.
fn solve_pair(a: &Candidate, b: &Candidate, free: &[usize], now: u64) -> Option<(Vec<f64>, Vec<f64>)> {
    let (first, second) = if (a.packet.expiry, a.packet.id) <= (b.packet.expiry, b.packet.id) {
        (a, b)
    } else {
        (b, a)
    };
    let d1 = first.packet.expiry.checked_sub(now).filter(|&d| d > 0)?;
    let d2 = second.packet.expiry.checked_sub(now).filter(|&d| d > 0)?;
    let l2 = second.packet.length_bits as f64;
    let dem1 = demand(first, free, first.packet.length_bits as f64 / d1 as f64);
    let mut dem2 = demand(second, free, adjusted_min_rate(l2, d2, true)?);

    let solve = |dem2: &Demand| match solve_lp2(&dem1, dem2, free.len()) {
        Ok(sol) => Some(sol.allocations[0].iter().map(|&v| snap(v)).collect::<Vec<f64>>()),
        Err(SolverError::Infeasible) => None,
        Err(e) => panic!("malformed pair instance: {e}"),
    };
    let mut x = solve(&dem2)?;
    let gap = (d2 - d1) as f64;
    if x.iter().any(|&v| v > 0.0 && v < 1.0 && v * gap < 2.0) {
        dem2.min_rate = adjusted_min_rate(l2, d2, false)?;
        x = solve(&dem2)?;
    }
    let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    if first.packet.id == a.packet.id {
        Some((x, y))
    } else {
        Some((y, x))
    }
}

/// Algorithm MRR-LP(2): every feasible singleton with all free RBs, and every
/// pair through the two-packet LP.
pub fn mrr_lp2_select(eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
    let free = ctx.free_rbs();
    let rbs = ctx.rbs();
    if free.is_empty() {
        return Err(PolicyError::EmptyDecision);
    }
    let mut order: Vec<&Candidate> = eligible.iter().collect();
    order.sort_by_key(|c| c.packet.id);

    let mut best = Best::default();
    for (i, a) in order.iter().enumerate() {
        let Some(rmin) = plain_min_rate(a, ctx.now) else { continue };
        let total: f64 = free.iter().map(|&k| a.rates[k]).sum();
        if total < rmin {
            continue;
        }
        let ones = vec![1.0; free.len()];
        best.offer(ScheduleDecision::from_allocations(vec![expand(a.packet.id, &ones, &free, rbs)], eligible));
        for b in &order[i + 1..] {
            if let Some((xa, xb)) = solve_pair(a, b, &free, ctx.now) {
                let allocs = vec![expand(a.packet.id, &xa, &free, rbs), expand(b.packet.id, &xb, &free, rbs)];
                best.offer(ScheduleDecision::from_allocations(allocs, eligible));
            }
        }
    }
    best.decision.ok_or(PolicyError::EmptyDecision)
}

/// MRR with the exact subset ILP over subsets of at most `p` packets.
pub fn mrr_ilp_select(eligible: &[Candidate], ctx: &SchedContext, p: usize) -> Result<ScheduleDecision, PolicyError> {
    assert!(p >= 1, "subset bound must be at least one");
    let free = ctx.free_rbs();
    if free.is_empty() {
        return Err(PolicyError::EmptyDecision);
    }
    let live: Vec<&Candidate> = eligible.iter().filter(|c| c.packet.expiry > ctx.now).collect();
    let demands: Vec<Demand> = live
        .iter()
        .map(|c| demand(c, &free, plain_min_rate(c, ctx.now).expect("live packet")))
        .collect();
    let search = enumerate_subsets_pruned(&demands, free.len(), p, solve_ilp_subset);
    let choice = search.best.ok_or(PolicyError::EmptyDecision)?;
    let allocs = choice
        .members
        .iter()
        .zip(&choice.allocations)
        .map(|(&m, x)| expand(demands[m].id, x, &free, ctx.rbs()))
        .collect();
    Ok(ScheduleDecision::from_allocations(allocs, eligible))
}

/// Maximum utility with deadlines: the single packet with the best reward
/// rate over all free RBs.
pub fn mud_select(eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
    mrr_ilp_select(eligible, ctx, 1)
}
