//! Preemptive URLLC overlay: URLLC packets puncture RBs already held by
//! non-URLLC transmissions, and victims that can no longer make their
//! deadline are released.

use super::{Candidate, PolicyError};
use crate::model::{effective_rate_after_puncture, min_rate, PacketId, Puncture};
use crate::solver::SolverError;

/// Largest `K·n` the exhaustive oracle accepts.
pub const URLLC_ORACLE_MAX_CELLS: usize = 14;

/// An in-flight non-URLLC transmission as the overlay sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct InflightView {
    pub id: PacketId,
    pub reward: f64,
    pub length_bits: f64,
    /// Rates frozen at admission.
    pub rates: Vec<f64>,
    /// Share of each RB's remaining time still ahead of this packet.
    pub share: Vec<f64>,
    /// RBs the packet transmits on in the current subframe.
    pub active: Vec<bool>,
    pub remaining_bits: f64,
    /// Subframes to expiry.
    pub time_left: u64,
}

impl InflightView {
    fn min_rate(&self) -> f64 {
        self.remaining_bits / self.time_left as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrllcAssignment {
    pub id: PacketId,
    pub rbs: Vec<bool>,
    /// Puncture length in subframes.
    pub duration: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UrllcOverlay {
    pub assignments: Vec<UrllcAssignment>,
    pub punctured: Vec<bool>,
    /// In-flight packets transmitting on a punctured RB.
    pub victims: Vec<PacketId>,
    /// Victims that can no longer meet their minimum rate.
    pub dropped: Vec<PacketId>,
    pub inflight_count: usize,
    pub urllc_count: usize,
}

impl UrllcOverlay {
    /// Reward rate of the in-flight packets that survive the overlay.
    pub fn surviving_rr(&self, inflight: &[InflightView]) -> f64 {
        inflight
            .iter()
            .filter(|v| !self.dropped.contains(&v.id))
            .map(|v| v.reward / v.length_bits * v.share.iter().zip(&v.rates).map(|(x, r)| x * r).sum::<f64>())
            .sum()
    }
}

/// Descending-rate greedy. URLLC packets are served in queue order; each
/// takes its best RBs not yet taken by an earlier URLLC packet until its
/// minimum rate is reached.
pub fn urllc_preempt(
    queue: &[Candidate],
    inflight: &[InflightView],
    rbs: usize,
    now: u64,
) -> Result<UrllcOverlay, PolicyError> {
    let mut overlay = UrllcOverlay {
        punctured: vec![false; rbs],
        inflight_count: inflight.len(),
        urllc_count: queue.len(),
        ..UrllcOverlay::default()
    };
    for c in queue {
        let id = c.packet.id;
        let need = min_rate(c.packet.length_bits as f64, c.packet.expiry, now).map_err(|_| PolicyError::UrllcOverload(id))?;
        let mut order: Vec<usize> = (0..rbs).filter(|&k| !overlay.punctured[k]).collect();
        order.sort_by(|&a, &b| c.rates[b].total_cmp(&c.rates[a]).then(a.cmp(&b)));
        let mut got = 0.0;
        let mut mine = vec![false; rbs];
        for k in order {
            if got >= need {
                break;
            }
            mine[k] = true;
            got += c.rates[k];
        }
        if got < need {
            return Err(PolicyError::UrllcOverload(id));
        }
        for (p, &m) in overlay.punctured.iter_mut().zip(&mine) {
            *p |= m;
        }
        overlay.assignments.push(UrllcAssignment {
            id,
            rbs: mine,
            duration: c.packet.expiry - now,
            rate: got,
        });
    }

    for v in inflight {
        if !(0..rbs).any(|k| v.active[k] && overlay.punctured[k]) {
            continue;
        }
        overlay.victims.push(v.id);
        let hits: Vec<Puncture> = overlay
            .assignments
            .iter()
            .map(|a| Puncture {
                rbs: (0..rbs).map(|k| a.rbs[k] && v.active[k]).collect(),
                duration: a.duration.min(v.time_left),
            })
            .collect();
        let eff = effective_rate_after_puncture(&v.rates, &hits, v.time_left);
        let rate: f64 = v.share.iter().zip(&eff).map(|(x, r)| x * r).sum();
        if rate < v.min_rate() * (1.0 - 1e-9) {
            overlay.dropped.push(v.id);
        }
    }
    Ok(overlay)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrllcOracleOutcome {
    pub inflight_x: Vec<Vec<bool>>,
    pub urllc_x: Vec<Vec<bool>>,
    pub total_rr: f64,
}

/// Exact maximizer of the in-flight reward rate over all 0/1 assignments of
/// in-flight and URLLC packets to RBs, subject to the punctured deadline
/// constraints and one packet of each kind per RB. `None` when the URLLC
/// packets cannot all be served.
pub fn urllc_exhaustive_oracle(
    queue: &[Candidate],
    inflight: &[InflightView],
    rbs: usize,
    now: u64,
) -> Result<Option<UrllcOracleOutcome>, PolicyError> {
    let cells = rbs * (queue.len() + inflight.len());
    if cells > URLLC_ORACLE_MAX_CELLS {
        return Err(SolverError::InstanceTooLarge {
            cells,
            limit: URLLC_ORACLE_MAX_CELLS,
        }
        .into());
    }
    let mut needs = Vec::with_capacity(queue.len());
    for c in queue {
        match min_rate(c.packet.length_bits as f64, c.packet.expiry, now) {
            Ok(r) => needs.push(r),
            Err(_) => return Ok(None),
        }
    }
    let search = OracleSearch {
        queue,
        inflight,
        needs,
        rbs,
        now,
    };
    let mut owner_i = vec![None; rbs];
    let mut owner_u = vec![None; rbs];
    let mut best = None;
    search.walk(0, &mut owner_i, &mut owner_u, &mut best);
    Ok(best)
}

struct OracleSearch<'a> {
    queue: &'a [Candidate<'a>],
    inflight: &'a [InflightView],
    needs: Vec<f64>,
    rbs: usize,
    now: u64,
}

impl OracleSearch<'_> {
    fn walk(
        &self,
        k: usize,
        owner_i: &mut Vec<Option<usize>>,
        owner_u: &mut Vec<Option<usize>>,
        best: &mut Option<UrllcOracleOutcome>,
    ) {
        if k == self.rbs {
            self.evaluate(owner_i, owner_u, best);
            return;
        }
        for oi in std::iter::once(None).chain((0..self.inflight.len()).map(Some)) {
            for ou in std::iter::once(None).chain((0..self.queue.len()).map(Some)) {
                owner_i[k] = oi;
                owner_u[k] = ou;
                self.walk(k + 1, owner_i, owner_u, best);
            }
        }
    }

    fn evaluate(&self, owner_i: &[Option<usize>], owner_u: &[Option<usize>], best: &mut Option<UrllcOracleOutcome>) {
        let mask = |owners: &[Option<usize>], who| -> Vec<bool> { owners.iter().map(|o| *o == Some(who)).collect() };
        let urllc_x: Vec<Vec<bool>> = (0..self.queue.len()).map(|u| mask(owner_u, u)).collect();
        for (u, c) in self.queue.iter().enumerate() {
            let rate: f64 = (0..self.rbs).filter(|&k| urllc_x[u][k]).map(|k| c.rates[k]).sum();
            if rate < self.needs[u] {
                return;
            }
        }
        let inflight_x: Vec<Vec<bool>> = (0..self.inflight.len()).map(|i| mask(owner_i, i)).collect();
        let mut total = 0.0;
        for (v, x) in self.inflight.iter().zip(&inflight_x) {
            if !x.iter().any(|&b| b) {
                continue;
            }
            let punctures: Vec<Puncture> = self
                .queue
                .iter()
                .zip(&urllc_x)
                .map(|(c, xl)| Puncture {
                    rbs: xl.clone(),
                    duration: (c.packet.expiry - self.now).min(v.time_left),
                })
                .collect();
            let eff = effective_rate_after_puncture(&v.rates, &punctures, v.time_left);
            let rate: f64 = (0..self.rbs).filter(|&k| x[k]).map(|k| eff[k]).sum();
            if rate < v.min_rate() * (1.0 - 1e-9) {
                return;
            }
            total += v.reward / v.length_bits * (0..self.rbs).filter(|&k| x[k]).map(|k| v.rates[k]).sum::<f64>();
        }
        if best.as_ref().is_none_or(|b| total > b.total_rr) {
            *best = Some(UrllcOracleOutcome {
                inflight_x,
                urllc_x,
                total_rr: total,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Packet;

    fn urllc(id: u64, now: u64) -> Packet {
        Packet {
            id: PacketId(id),
            arrival: now,
            expiry: now + 1,
            subscriber: 0,
            length_bits: 7,
            reward: 0.0,
            urllc: true,
        }
    }

    fn holder(id: u64, rbs: &[bool], rates: &[f64], remaining_bits: f64, time_left: u64) -> InflightView {
        InflightView {
            id: PacketId(id),
            reward: remaining_bits,
            length_bits: remaining_bits,
            rates: rates.to_vec(),
            share: rbs.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            active: rbs.to_vec(),
            remaining_bits,
            time_left,
        }
    }

    #[test]
    fn greedy_takes_best_rbs_until_minimum() {
        let p = urllc(1, 0);
        let r = [5.0, 3.0, 1.0];
        let q = [Candidate { packet: &p, rates: &r }];
        let o = urllc_preempt(&q, &[], 3, 0).unwrap();
        assert_eq!(o.assignments[0].rbs, vec![true, true, false]);
        assert_eq!(o.assignments[0].duration, 1);
        assert_eq!(o.punctured, vec![true, true, false]);
    }

    #[test]
    fn second_packet_skips_taken_rbs() {
        let (a, b) = (urllc(1, 0), urllc(2, 0));
        let r = [9.0, 8.0, 1.0];
        let q = [Candidate { packet: &a, rates: &r }, Candidate { packet: &b, rates: &r }];
        let o = urllc_preempt(&q, &[], 3, 0).unwrap();
        assert_eq!(o.assignments[0].rbs, vec![true, false, false]);
        assert_eq!(o.assignments[1].rbs, vec![false, true, false]);
    }

    #[test]
    fn unreachable_minimum_is_overload() {
        let p = urllc(3, 0);
        let r = [1.0, 2.0];
        let q = [Candidate { packet: &p, rates: &r }];
        assert_eq!(urllc_preempt(&q, &[], 2, 0), Err(PolicyError::UrllcOverload(PacketId(3))));
        assert_eq!(urllc_exhaustive_oracle(&q, &[], 2, 0), Ok(None));
    }

    #[test]
    fn no_urllc_is_an_empty_overlay() {
        let v = [holder(1, &[true, false], &[4.0, 4.0], 4.0, 2)];
        let o = urllc_preempt(&[], &v, 2, 0).unwrap();
        assert!(o.assignments.is_empty() && o.victims.is_empty() && o.dropped.is_empty());
        assert_eq!(o.inflight_count, 1);
        let best = urllc_exhaustive_oracle(&[], &v, 2, 0).unwrap().unwrap();
        assert!(best.total_rr >= o.surviving_rr(&v));
    }

    #[test]
    fn victims_are_rechecked() {
        let p = urllc(9, 0);
        let r = [10.0, 0.0];
        let q = [Candidate { packet: &p, rates: &r }];
        // tight packet loses a whole subframe on its only RB; the loose one copes
        let v = [
            holder(1, &[true, false], &[8.0, 0.0], 16.0, 2),
            holder(2, &[false, true], &[0.0, 8.0], 4.0, 2),
        ];
        let o = urllc_preempt(&q, &v, 2, 0).unwrap();
        assert_eq!(o.victims, vec![PacketId(1)]);
        assert_eq!(o.dropped, vec![PacketId(1)]);
        let loose = [holder(1, &[true, false], &[8.0, 0.0], 6.0, 2)];
        let o = urllc_preempt(&q, &loose, 2, 0).unwrap();
        assert_eq!(o.victims, vec![PacketId(1)]);
        assert!(o.dropped.is_empty());
    }

    #[test]
    fn greedy_can_overload_where_enumeration_succeeds() {
        // first packet grabs the RB the second one needs
        let (mut a, mut b) = (urllc(1, 0), urllc(2, 0));
        a.length_bits = 9;
        b.length_bits = 5;
        let (ra, rb) = ([10.0, 9.0], [10.0, 1.0]);
        let q = [Candidate { packet: &a, rates: &ra }, Candidate { packet: &b, rates: &rb }];
        assert_eq!(urllc_preempt(&q, &[], 2, 0), Err(PolicyError::UrllcOverload(PacketId(2))));
        let best = urllc_exhaustive_oracle(&q, &[], 2, 0).unwrap().unwrap();
        assert_eq!(best.urllc_x, vec![vec![false, true], vec![true, false]]);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let v: Vec<InflightView> = (0..4).map(|i| holder(i, &[true; 4], &[1.0; 4], 1.0, 4)).collect();
        assert!(matches!(
            urllc_exhaustive_oracle(&[], &v, 4, 0),
            Err(PolicyError::Solver(SolverError::InstanceTooLarge { .. }))
        ));
    }
}
