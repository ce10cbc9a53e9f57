//! Subframe-resolution downlink simulator with optional run-time invariant
//! checks.

use crate::channel::{ChannelConfig, FadingChannel, RateSource};
use crate::metrics::{utility_from_sums, Claim2Summary, Histogram, SimReport};
use crate::model::{Clock, Packet, PacketId, RateMatrix};
use crate::policies::{
    urllc_preempt, Candidate, InflightView, MlwdfParams, PolicyError, PolicyKind, SchedContext, ScheduleDecision,
};
use crate::solver::FEASIBILITY_SLACK;
use crate::traffic::{generate_stream, TrafficConfig};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{self, Write};
use std::time::{Duration, Instant};

/// Rewards are multiplied by this in the scaling-invariance check.
const REWARD_SCALE_PROBE: f64 = 4.0;
const FAILURE_LOG_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub subframes_per_frame: u64,
    pub mlwdf: MlwdfParams,
    pub check_invariants: bool,
    pub record_events: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            subframes_per_frame: 10,
            mlwdf: MlwdfParams::default(),
            check_invariants: false,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrive,
    Admit,
    Deliver,
    Expire,
    Puncture,
    UrllcOverload,
    VictimDrop,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub event: EventKind,
    pub packet: u64,
    pub rbs: Vec<usize>,
}

/// Completion bounds for a shared RB: the earlier packet, holding the RB for
/// its first `⌈x·d1⌉` subframes, and the later one taking `⌈(1−x)·d2⌉` more.
pub fn claim2_bound(d1: u64, d2: u64, x: f64) -> (u64, u64) {
    let first = ceil_share(x, d1);
    (first, first + ceil_share(1.0 - x, d2))
}

/// True when the bound holds: the first ends by `d1`, the second by `d2 + 2`.
pub fn claim2_holds(d1: u64, d2: u64, x: f64) -> bool {
    let (first, second) = claim2_bound(d1, d2, x);
    first <= d1 && second <= d2 + 2
}

fn ceil_share(x: f64, d: u64) -> u64 {
    (x * d as f64 - 1e-9).ceil().max(0.0) as u64
}

#[derive(Debug, Clone, Copy, Default)]
struct RbState {
    front: Option<PacketId>,
    /// Subframes left for `front` before `next` takes over.
    budget: Option<u64>,
    next: Option<PacketId>,
}

#[derive(Debug, Clone)]
struct InFlight {
    packet: Packet,
    rates: Vec<f64>,
    remaining_bits: f64,
    pair: Option<usize>,
}

#[derive(Debug, Clone)]
struct PairRecord {
    first: PacketId,
    second: PacketId,
    punctured: bool,
    open: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Delivered,
    Expired,
    Victim,
}

#[derive(Debug, Clone, Default)]
struct Accounts {
    arrived: u64,
    delivered: u64,
    expired: u64,
    arrived_reward: f64,
    delivered_reward: f64,
    arrived_bits: u64,
    delivered_bits: u64,
    urllc_sent: u64,
    urllc_delivered: u64,
    urllc_missed: u64,
    urllc_overloads: u64,
    victims_dropped: u64,
    decisions: u64,
    histogram: Histogram,
    claim2: Claim2Summary,
    invariant_failures: u64,
    policy_time: Duration,
}

pub struct Simulation<'a, R: RateSource + ?Sized> {
    policy: PolicyKind,
    opts: SimOptions,
    source: &'a R,
    clock: Clock,
    rates: RateMatrix,
    rates_frame: u64,
    pending: Vec<Packet>,
    next_arrival: usize,
    queues: Vec<VecDeque<Packet>>,
    urllc: VecDeque<Packet>,
    inflight: Vec<InFlight>,
    rb: Vec<RbState>,
    avg_throughput: Vec<f64>,
    pairs: Vec<PairRecord>,
    acc: Accounts,
    events: Vec<Event>,
    failures: Vec<String>,
}

impl<'a, R: RateSource + ?Sized> Simulation<'a, R> {
    /// `packets` must be sorted by arrival.
    pub fn new(policy: PolicyKind, opts: SimOptions, source: &'a R, packets: Vec<Packet>) -> Self {
        assert!(
            packets.windows(2).all(|w| w[0].arrival <= w[1].arrival),
            "packets must be sorted by arrival"
        );
        assert!(packets.iter().all(|p| p.subscriber < source.subscribers()), "subscriber out of range");
        let clock = Clock::new(opts.subframes_per_frame);
        let rates = source.frame_rates(0);
        Simulation {
            policy,
            clock,
            rates,
            rates_frame: 0,
            pending: packets,
            next_arrival: 0,
            queues: vec![VecDeque::new(); source.subscribers()],
            urllc: VecDeque::new(),
            inflight: Vec::new(),
            rb: vec![RbState::default(); source.rbs()],
            avg_throughput: vec![0.0; source.subscribers()],
            pairs: Vec::new(),
            acc: Accounts::default(),
            events: Vec::new(),
            failures: Vec::new(),
            source,
            opts,
        }
    }

    pub fn now(&self) -> u64 {
        self.clock.now
    }

    pub fn is_done(&self) -> bool {
        self.next_arrival == self.pending.len()
            && self.urllc.is_empty()
            && self.inflight.is_empty()
            && self.queues.iter().all(VecDeque::is_empty)
    }

    pub fn queued(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum::<usize>() + self.urllc.len()
    }

    pub fn in_flight(&self) -> usize {
        self.inflight.len()
    }

    pub fn claim2(&self) -> Claim2Summary {
        self.acc.claim2
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Messages for the first few invariant failures.
    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn run_to_end(&mut self) {
        while !self.is_done() {
            self.step();
        }
    }

    pub fn report(&self, seed: u64, lambda: f64) -> SimReport {
        let a = &self.acc;
        SimReport {
            policy: self.policy.to_string(),
            seed,
            lambda,
            utility: utility_from_sums(a.delivered_reward, a.arrived_reward).ok(),
            delivered_reward: a.delivered_reward,
            arrived_reward: a.arrived_reward,
            delivered_bytes_fraction: (a.arrived_bits > 0).then(|| a.delivered_bits as f64 / a.arrived_bits as f64),
            arrived: a.arrived,
            delivered: a.delivered,
            expired: a.expired,
            urllc_sent: a.urllc_sent,
            urllc_missed: a.urllc_missed,
            urllc_overloads: a.urllc_overloads,
            victims_dropped: a.victims_dropped,
            decisions: a.decisions,
            histogram: a.histogram.clone(),
            claim2: a.claim2,
            subframes: self.clock.now,
            invariant_failures: a.invariant_failures,
            policy_ms: a.policy_time.as_secs_f64() * 1e3,
        }
    }

    /// Advances one subframe.
    pub fn step(&mut self) {
        let now = self.clock.now;
        if self.clock.frame_index() != self.rates_frame {
            self.rates_frame = self.clock.frame_index();
            self.rates = self.source.frame_rates(self.rates_frame);
        }
        let before = if self.opts.check_invariants {
            self.holdings()
        } else {
            Vec::new()
        };

        self.admit_arrivals(now);
        self.drop_expired(now);
        let punctured = self.serve_urllc(now);
        self.schedule(now, &punctured);
        let handoffs = self.transmit(now, &punctured);

        if self.opts.check_invariants {
            self.check_state(&before, &handoffs);
        }
        self.clock.tick();
    }

    fn log(&mut self, event: EventKind, packet: PacketId, rbs: Vec<usize>) {
        if self.opts.record_events {
            self.events.push(Event {
                tick: self.clock.now,
                event,
                packet: packet.0,
                rbs,
            });
        }
    }

    fn fail(&mut self, msg: String) {
        self.acc.invariant_failures += 1;
        if self.failures.len() < FAILURE_LOG_LIMIT {
            self.failures.push(format!("t={}: {msg}", self.clock.now));
        }
    }

    fn admit_arrivals(&mut self, now: u64) {
        while self.next_arrival < self.pending.len() && self.pending[self.next_arrival].arrival <= now {
            let p = self.pending[self.next_arrival].clone();
            self.next_arrival += 1;
            self.acc.arrived += 1;
            self.log(EventKind::Arrive, p.id, Vec::new());
            if p.urllc {
                self.acc.urllc_sent += 1;
                self.urllc.push_back(p);
            } else {
                self.acc.arrived_reward += p.reward;
                self.acc.arrived_bits += p.length_bits;
                let q = &mut self.queues[p.subscriber];
                let at = q.partition_point(|o| (o.expiry, o.id) < (p.expiry, p.id));
                q.insert(at, p);
            }
        }
    }

    fn drop_expired(&mut self, now: u64) {
        for m in 0..self.queues.len() {
            while self.queues[m].front().is_some_and(|p| p.expiry <= now) {
                let p = self.queues[m].pop_front().expect("non-empty");
                self.acc.expired += 1;
                self.log(EventKind::Expire, p.id, Vec::new());
            }
        }
        let before = self.urllc.len();
        self.urllc.retain(|p| p.expiry > now);
        self.acc.urllc_missed += (before - self.urllc.len()) as u64;
        let dead: Vec<PacketId> =
            self.inflight.iter().filter(|f| f.packet.expiry <= now).map(|f| f.packet.id).collect();
        for id in dead {
            self.finish(id, Exit::Expired);
        }
    }

    fn inflight_views(&self) -> Vec<InflightView> {
        let k = self.rb.len();
        self.inflight
            .iter()
            .map(|f| {
                let id = f.packet.id;
                let d = f.packet.expiry - self.clock.now;
                let share = (0..k)
                    .map(|j| {
                        let s = self.rb[j];
                        if s.front == Some(id) {
                            s.budget.map_or(1.0, |b| (b.min(d) as f64) / d as f64)
                        } else if s.next == Some(id) {
                            let b = s.budget.unwrap_or(0).min(d);
                            (d - b) as f64 / d as f64
                        } else {
                            0.0
                        }
                    })
                    .collect();
                InflightView {
                    id,
                    reward: f.packet.reward,
                    length_bits: f.packet.length_bits as f64,
                    rates: f.rates.clone(),
                    share,
                    active: (0..k).map(|j| self.rb[j].front == Some(id)).collect(),
                    remaining_bits: f.remaining_bits,
                    time_left: d,
                }
            })
            .collect()
    }

    /// Serves every queued URLLC packet this subframe and returns the
    /// punctured RBs.
    fn serve_urllc(&mut self, now: u64) -> Vec<bool> {
        let k = self.rb.len();
        while !self.urllc.is_empty() {
            let views = self.inflight_views();
            let result = {
                let queue: Vec<Candidate> = self
                    .urllc
                    .iter()
                    .map(|p| Candidate {
                        packet: p,
                        rates: self.rates.row(p.subscriber),
                    })
                    .collect();
                urllc_preempt(&queue, &views, k, now)
            };
            match result {
                Ok(overlay) => {
                    for a in &overlay.assignments {
                        let rbs = (0..k).filter(|&j| a.rbs[j]).collect();
                        self.log(EventKind::Puncture, a.id, rbs);
                    }
                    self.acc.urllc_delivered += self.urllc.len() as u64;
                    self.urllc.clear();
                    for id in &overlay.victims {
                        if let Some(pair) = self.inflight.iter().find(|f| f.packet.id == *id).and_then(|f| f.pair) {
                            self.pairs[pair].punctured = true;
                        }
                    }
                    for &id in &overlay.dropped {
                        self.finish(id, Exit::Victim);
                    }
                    return overlay.punctured;
                }
                Err(PolicyError::UrllcOverload(id)) => {
                    self.urllc.retain(|p| p.id != id);
                    self.acc.urllc_missed += 1;
                    self.acc.urllc_overloads += 1;
                    self.log(EventKind::UrllcOverload, id, Vec::new());
                }
                Err(e) => panic!("URLLC overlay failed: {e}"),
            }
        }
        vec![false; k]
    }

    fn schedule(&mut self, now: u64, punctured: &[bool]) {
        loop {
            let free: Vec<bool> = (0..self.rb.len()).map(|k| self.rb[k].front.is_none() && !punctured[k]).collect();
            if !free.contains(&true) || self.queues.iter().all(VecDeque::is_empty) {
                return;
            }
            let (result, problems) = {
                let cands: Vec<Candidate> = self
                    .queues
                    .iter()
                    .filter_map(VecDeque::front)
                    .map(|p| Candidate {
                        packet: p,
                        rates: self.rates.row(p.subscriber),
                    })
                    .collect();
                let ctx = SchedContext {
                    now,
                    free: &free,
                    avg_throughput: &self.avg_throughput,
                    mlwdf: self.opts.mlwdf,
                };
                let t0 = Instant::now();
                let result = self.policy.select(&cands, &ctx);
                self.acc.policy_time += t0.elapsed();
                let problems = if self.opts.check_invariants {
                    self.decision_problems(&cands, &ctx, &result)
                } else {
                    Vec::new()
                };
                (result, problems)
            };
            for msg in problems {
                self.fail(msg);
            }
            match result {
                Ok(d) => self.admit(d, now),
                Err(PolicyError::EmptyDecision) => return,
                Err(e) => panic!("policy {} failed: {e}", self.policy),
            }
        }
    }

    fn decision_problems(
        &self,
        cands: &[Candidate],
        ctx: &SchedContext,
        result: &Result<ScheduleDecision, PolicyError>,
    ) -> Vec<String> {
        let mut out = Vec::new();
        match result {
            Ok(d) => {
                if let Err(e) = d.check_exclusive(ctx.free) {
                    out.push(format!("{}: {e}", self.policy));
                }
                let scaled: Vec<Packet> = cands
                    .iter()
                    .map(|c| Packet {
                        reward: c.packet.reward * REWARD_SCALE_PROBE,
                        ..c.packet.clone()
                    })
                    .collect();
                let scaled_cands: Vec<Candidate> = scaled
                    .iter()
                    .zip(cands)
                    .map(|(p, c)| Candidate { packet: p, rates: c.rates })
                    .collect();
                match self.policy.select(&scaled_cands, ctx) {
                    Ok(s) if s.chosen == d.chosen => {}
                    other => out.push(format!(
                        "{}: scaled rewards changed the choice {:?} -> {:?}",
                        self.policy,
                        d.chosen,
                        other.map(|s| s.chosen)
                    )),
                }
            }
            Err(PolicyError::EmptyDecision) => {
                let checks_feasibility = matches!(self.policy, PolicyKind::MrrLp2 | PolicyKind::MrrIlp(_) | PolicyKind::Mud);
                let idle_with_work = cands.iter().any(|c| {
                    if !checks_feasibility {
                        return true;
                    }
                    let total: f64 = (0..ctx.rbs()).filter(|&k| ctx.free[k]).map(|k| c.rates[k]).sum();
                    total * (c.packet.expiry - ctx.now) as f64 >= c.packet.length_bits as f64
                });
                if idle_with_work {
                    out.push(format!("{}: idle with a schedulable packet and a free RB", self.policy));
                }
            }
            Err(e) => out.push(format!("{}: {e}", self.policy)),
        }
        out
    }

    fn admit(&mut self, d: ScheduleDecision, now: u64) {
        self.acc.decisions += 1;
        *self.acc.histogram.entry(d.added_count).or_default() += 1;
        let mut admitted = Vec::with_capacity(d.allocations.len());
        for a in &d.allocations {
            let sub = self
                .queues
                .iter()
                .position(|q| q.front().is_some_and(|p| p.id == a.owner))
                .expect("chosen packet is a queue head");
            let packet = self.queues[sub].pop_front().expect("non-empty");
            admitted.push(packet);
        }

        let shared = d.allocations.len() == 2 && d.allocations.iter().any(|a| !a.is_binary());
        let pair = if shared {
            let (mut i, mut j) = (0, 1);
            if (admitted[1].expiry, admitted[1].id) < (admitted[0].expiry, admitted[0].id) {
                (i, j) = (1, 0);
            }
            let (first, second) = (&admitted[i], &admitted[j]);
            let (d1, d2) = (first.expiry - now, second.expiry - now);
            self.acc.claim2.pairs += 1;
            for k in 0..self.rb.len() {
                let x = d.allocations[i].x[k];
                if x >= 1.0 {
                    self.rb[k] = RbState {
                        front: Some(first.id),
                        ..RbState::default()
                    };
                } else if x > 0.0 {
                    if !claim2_holds(d1, d2, x) {
                        self.acc.claim2.violations += 1;
                    }
                    self.rb[k] = RbState {
                        front: Some(first.id),
                        budget: Some(ceil_share(x, d1).max(1)),
                        next: Some(second.id),
                    };
                } else if d.allocations[j].x[k] > 0.0 {
                    self.rb[k] = RbState {
                        front: Some(second.id),
                        ..RbState::default()
                    };
                }
            }
            self.pairs.push(PairRecord {
                first: first.id,
                second: second.id,
                punctured: false,
                open: 2,
            });
            Some(self.pairs.len() - 1)
        } else {
            for a in &d.allocations {
                for k in 0..self.rb.len() {
                    if a.x[k] > 0.0 {
                        self.rb[k] = RbState {
                            front: Some(a.owner),
                            ..RbState::default()
                        };
                    }
                }
            }
            None
        };

        for (packet, a) in admitted.into_iter().zip(&d.allocations) {
            let rbs = (0..self.rb.len()).filter(|&k| a.x[k] > 0.0).collect();
            self.log(EventKind::Admit, packet.id, rbs);
            self.inflight.push(InFlight {
                rates: self.rates.row(packet.subscriber).to_vec(),
                remaining_bits: packet.length_bits as f64,
                packet,
                pair,
            });
        }
    }

    /// Sends one subframe of data. Returns the (packet, RB) pairs where a
    /// time-share budget ran out and the RB passed to the second packet.
    fn transmit(&mut self, now: u64, punctured: &[bool]) -> Vec<(PacketId, usize)> {
        let mut sent = vec![0.0; self.inflight.len()];
        for k in 0..self.rb.len() {
            let Some(id) = self.rb[k].front else { continue };
            if !punctured[k] {
                let i = self.index_of(id).expect("RB holder is in flight");
                sent[i] += self.inflight[i].rates[k];
            }
            if let Some(b) = self.rb[k].budget.as_mut() {
                *b -= 1;
            }
        }
        let mut served = vec![0.0; self.avg_throughput.len()];
        for (f, bits) in self.inflight.iter_mut().zip(sent) {
            let used = bits.min(f.remaining_bits);
            f.remaining_bits -= used;
            served[f.packet.subscriber] += used;
        }
        let alpha = self.opts.mlwdf.smoothing;
        for (avg, s) in self.avg_throughput.iter_mut().zip(served) {
            *avg = (1.0 - alpha) * *avg + alpha * s;
        }

        let mut handoffs = Vec::new();
        for k in 0..self.rb.len() {
            if self.rb[k].budget == Some(0) {
                handoffs.push((self.rb[k].front.expect("budget implies holder"), k));
                self.promote(k);
            }
        }
        let done: Vec<PacketId> = self
            .inflight
            .iter()
            .filter(|f| f.remaining_bits <= FEASIBILITY_SLACK * f.packet.length_bits as f64 + 1e-9)
            .map(|f| f.packet.id)
            .collect();
        for id in done {
            if self.opts.check_invariants {
                let f = &self.inflight[self.index_of(id).expect("in flight")];
                if now + 1 > f.packet.expiry {
                    self.fail(format!("packet {id} delivered after its expiry"));
                }
            }
            self.finish(id, Exit::Delivered);
        }
        handoffs
    }

    fn index_of(&self, id: PacketId) -> Option<usize> {
        self.inflight.iter().position(|f| f.packet.id == id)
    }

    fn promote(&mut self, k: usize) {
        self.rb[k] = RbState {
            front: self.rb[k].next,
            ..RbState::default()
        };
    }

    fn finish(&mut self, id: PacketId, exit: Exit) {
        let i = self.index_of(id).expect("finishing packet is in flight");
        let f = self.inflight.remove(i);
        let mut held = Vec::new();
        for k in 0..self.rb.len() {
            if self.rb[k].front == Some(id) {
                held.push(k);
                self.promote(k);
            } else if self.rb[k].next == Some(id) {
                self.rb[k].next = None;
            }
        }
        match exit {
            Exit::Delivered => {
                self.acc.delivered += 1;
                self.acc.delivered_reward += f.packet.reward;
                self.acc.delivered_bits += f.packet.length_bits;
                self.log(EventKind::Deliver, id, held.clone());
            }
            Exit::Expired => {
                self.acc.expired += 1;
                self.log(EventKind::Expire, id, held.clone());
            }
            Exit::Victim => {
                self.acc.expired += 1;
                self.acc.victims_dropped += 1;
                self.log(EventKind::VictimDrop, id, held.clone());
            }
        }
        if let Some(p) = f.pair {
            self.close_pair(p, &f, exit, &held);
        }
    }

    fn close_pair(&mut self, p: usize, f: &InFlight, exit: Exit, held: &[usize]) {
        let rec = &mut self.pairs[p];
        rec.open -= 1;
        if rec.punctured {
            if rec.open == 0 {
                self.acc.claim2.punctured += 1;
            }
            return;
        }
        let violated = if f.packet.id == rec.first {
            exit != Exit::Delivered
        } else {
            debug_assert_eq!(f.packet.id, rec.second);
            match exit {
                Exit::Delivered => false,
                Exit::Victim => false,
                Exit::Expired => {
                    // subframes it would still need at its full rate
                    let rate: f64 = held.iter().map(|&k| f.rates[k]).sum();
                    rate <= 0.0 || (f.remaining_bits / rate - 1e-9).ceil() > 2.0
                }
            }
        };
        if violated {
            self.acc.claim2.violations += 1;
        }
    }

    fn holdings(&self) -> Vec<(PacketId, Vec<usize>)> {
        self.inflight
            .iter()
            .map(|f| {
                let id = f.packet.id;
                let rbs = (0..self.rb.len())
                    .filter(|&k| self.rb[k].front == Some(id) || self.rb[k].next == Some(id))
                    .collect();
                (id, rbs)
            })
            .collect()
    }

    fn check_state(&mut self, before: &[(PacketId, Vec<usize>)], handoffs: &[(PacketId, usize)]) {
        let mut problems = Vec::new();
        let a = &self.acc;
        let accounted = a.delivered
            + a.expired
            + a.urllc_delivered
            + a.urllc_missed
            + self.queued() as u64
            + self.inflight.len() as u64;
        if accounted != a.arrived {
            problems.push(format!("conservation: arrived {} but accounted {accounted}", a.arrived));
        }
        if a.delivered_reward > a.arrived_reward * (1.0 + 1e-12) || a.delivered_reward < 0.0 {
            problems.push(format!("utility outside [0,1]: {} / {}", a.delivered_reward, a.arrived_reward));
        }
        for (k, s) in self.rb.iter().enumerate() {
            for id in [s.front, s.next].into_iter().flatten() {
                if self.index_of(id).is_none() {
                    problems.push(format!("RB {k} held by {id}, which is not in flight"));
                }
            }
            if s.front.is_some() && s.front == s.next {
                problems.push(format!("RB {k} lists {:?} twice", s.front));
            }
        }
        let now_held = self.holdings();
        for (id, old) in before {
            let Some((_, new)) = now_held.iter().find(|(n, _)| n == id) else { continue };
            for k in old {
                if !new.contains(k) && !handoffs.contains(&(*id, *k)) {
                    problems.push(format!("packet {id} lost RB {k} while still in flight"));
                }
            }
        }
        for msg in problems {
            self.fail(msg);
        }
    }
}

/// Writes events as line-delimited JSON.
pub fn write_events<W: Write>(events: &[Event], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// One seeded replication: traffic and channel are both drawn from `seed`.
pub fn run(
    policy: PolicyKind,
    traffic: &TrafficConfig,
    channel: &ChannelConfig,
    seed: u64,
    opts: &SimOptions,
) -> SimReport {
    run_with_events(policy, traffic, channel, seed, opts).0
}

pub fn run_with_events(
    policy: PolicyKind,
    traffic: &TrafficConfig,
    channel: &ChannelConfig,
    seed: u64,
    opts: &SimOptions,
) -> (SimReport, Vec<Event>) {
    let traffic = TrafficConfig {
        seed,
        ..traffic.clone()
    };
    let channel = ChannelConfig {
        seed,
        ..channel.clone()
    };
    let source = FadingChannel::new(channel.clone());
    let packets = generate_stream(&traffic, channel.subscribers);
    let mut sim = Simulation::new(policy, opts.clone(), &source, packets);
    sim.run_to_end();
    (sim.report(seed, traffic.arrival_rate), std::mem::take(&mut sim.events))
}
