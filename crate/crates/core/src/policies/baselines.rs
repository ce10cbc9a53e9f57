use super::{Candidate, PolicyError, SchedContext, ScheduleDecision};
use crate::model::{Allocation, Packet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlwdfParams {
    /// Target probability of missing the deadline.
    pub delta: f64,
    /// Weight of the newest sample in the smoothed throughput.
    pub smoothing: f64,
}

impl Default for MlwdfParams {
    fn default() -> Self {
        MlwdfParams {
            delta: 0.05,
            smoothing: 0.1,
        }
    }
}

/// Earliest deadline first: the most urgent packet gets every free RB.
pub fn edf_select(eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
    let free = ctx.free_rbs();
    if free.is_empty() {
        return Err(PolicyError::EmptyDecision);
    }
    let c = eligible
        .iter()
        .min_by_key(|c| (c.packet.expiry, c.packet.id))
        .ok_or(PolicyError::EmptyDecision)?;
    let x = ctx.free.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    Ok(ScheduleDecision::from_allocations(vec![Allocation::new(c.packet.id, x)], eligible))
}

/// Gives each free RB to the candidate maximizing `score`, comparing
/// (score, rate) and then preferring the lower id.
fn per_rb_argmax<F>(eligible: &[Candidate], ctx: &SchedContext, score: F) -> Result<ScheduleDecision, PolicyError>
where
    F: Fn(&Candidate, usize) -> f64,
{
    let free = ctx.free_rbs();
    if free.is_empty() || eligible.is_empty() {
        return Err(PolicyError::EmptyDecision);
    }
    let mut allocs: Vec<Allocation> = Vec::new();
    for k in free {
        let winner = eligible
            .iter()
            .max_by(|a, b| {
                let key = |c: &Candidate| (score(c, k), c.rates[k]);
                let (sa, ra) = key(a);
                let (sb, rb) = key(b);
                sa.total_cmp(&sb)
                    .then(ra.total_cmp(&rb))
                    .then_with(|| b.packet.id.cmp(&a.packet.id))
            })
            .expect("non-empty");
        match allocs.iter_mut().find(|a| a.owner == winner.packet.id) {
            Some(a) => a.x[k] = 1.0,
            None => {
                let mut a = Allocation::empty(winner.packet.id, ctx.rbs());
                a.x[k] = 1.0;
                allocs.push(a);
            }
        }
    }
    Ok(ScheduleDecision::from_allocations(allocs, eligible))
}

/// Each free RB goes to the candidate with the highest rate on it.
pub fn mxrate_select(eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
    per_rb_argmax(eligible, ctx, |c, k| c.rates[k])
}

/// `γ·W·r / r̄` with `γ = −ln δ / τ`, `τ` the packet's lifetime and `W` its
/// waiting time, both in subframes.
pub fn mlwdf_metric(packet: &Packet, rate: f64, avg_throughput: f64, now: u64, params: &MlwdfParams) -> f64 {
    let tau = packet.lifetime() as f64;
    let gamma = -params.delta.ln() / tau;
    let waited = now.saturating_sub(packet.arrival) as f64;
    gamma * waited * rate / avg_throughput.max(1.0)
}

/// Modified largest weighted delay first, per RB.
pub fn mlwdf_select(eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
    per_rb_argmax(eligible, ctx, |c, k| {
        let avg = ctx.avg_throughput.get(c.packet.subscriber).copied().unwrap_or(1.0);
        mlwdf_metric(c.packet, c.rates[k], avg, ctx.now, &ctx.mlwdf)
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{candidates, ctx, packet};
    use super::*;
    use crate::model::PacketId;

    const NO_AVG: [f64; 0] = [];

    #[test]
    fn edf_picks_earliest_then_lowest_id() {
        let p = [packet(1, 0, 5, 8, 1.0), packet(2, 0, 3, 8, 1.0), packet(3, 0, 9, 8, 1.0)];
        let r = [vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]];
        let free = [true, true];
        let d = edf_select(&candidates(&p, &r), &ctx(0, &free, &NO_AVG)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(2)]);
        assert_eq!(d.allocations[0].x, vec![1.0, 1.0]);

        let p = [packet(4, 0, 3, 8, 1.0), packet(2, 0, 3, 8, 1.0)];
        let d = edf_select(&candidates(&p, &r), &ctx(0, &free, &NO_AVG)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(2)]);
        assert_eq!(edf_select(&[], &ctx(0, &free, &NO_AVG)), Err(PolicyError::EmptyDecision));
    }

    #[test]
    fn mxrate_takes_column_argmax() {
        let p = [packet(1, 0, 5, 8, 1.0), packet(2, 0, 5, 8, 1.0)];
        let r = [vec![5.0, 1.0], vec![2.0, 9.0]];
        let free = [true, true];
        let d = mxrate_select(&candidates(&p, &r), &ctx(0, &free, &NO_AVG)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(1), PacketId(2)]);
        assert_eq!(d.allocations[0].x, vec![1.0, 0.0]);
        assert_eq!(d.allocations[1].x, vec![0.0, 1.0]);
        assert_eq!(d.added_count, 2);

        let r = [vec![3.0, 3.0], vec![3.0, 3.0]];
        let d = mxrate_select(&candidates(&p, &r), &ctx(0, &free, &NO_AVG)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(1)]);
        assert_eq!(d.allocations[0].x, vec![1.0, 1.0]);
    }

    #[test]
    fn mlwdf_prefers_longer_wait_then_rate() {
        let p = [packet(1, 6, 20, 8, 1.0), packet(2, 9, 23, 8, 1.0)];
        let r = [vec![4.0], vec![4.0]];
        let avg = [1.0, 1.0, 1.0];
        let free = [true];
        let d = mlwdf_select(&candidates(&p, &r), &ctx(10, &free, &avg)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(1)]);

        let p = [packet(1, 10, 20, 8, 1.0), packet(2, 10, 20, 8, 1.0)];
        let r = [vec![4.0], vec![6.0]];
        let d = mlwdf_select(&candidates(&p, &r), &ctx(10, &free, &avg)).unwrap();
        assert_eq!(d.chosen, vec![PacketId(2)]);
    }

    #[test]
    fn mlwdf_metric_table() {
        // (arrival, expiry, now, rate, avg) -> metric, evaluated by hand
        let table = [
            (0, 10, 4, 20.0, 5.0, 4.7931716376863855),
            (3, 8, 5, 7.5, 2.0, 4.4935984103309865),
            (10, 110, 60, 130.0, 40.0, 4.868064944525235),
            (2, 4, 3, 1.0, 1.0, 1.4978661367769954),
            (0, 400, 250, 88.25, 12.5, 13.218668657056986),
        ];
        for (a, e, now, rate, avg, want) in table {
            let got = mlwdf_metric(&packet(1, a, e, 8, 1.0), rate, avg, now, &MlwdfParams::default());
            assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
        }
    }
}
