//! Domain types shared by every module, plus the small rate and reward
//! formulas the schedulers are built from.
//!
//! Lengths are carried in bits, times in integer subframes (1 ms each).

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Bits per byte; the external configuration speaks bytes.
pub const BITS_PER_BYTE: u64 = 8;

/// Length of one subframe in seconds.
pub const SUBFRAME_SECONDS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("packet is expired: expiry {expiry} is not after time {now}")]
    Expired { expiry: u64, now: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PacketId(pub u64);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Integer subframe clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clock {
    pub now: u64,
    pub subframes_per_frame: u64,
}

impl Clock {
    pub fn new(subframes_per_frame: u64) -> Self {
        assert!(subframes_per_frame >= 1, "a frame holds at least one subframe");
        Clock {
            now: 0,
            subframes_per_frame,
        }
    }

    pub fn at(now: u64, subframes_per_frame: u64) -> Self {
        let mut clock = Clock::new(subframes_per_frame);
        clock.now = now;
        clock
    }

    pub fn frame_index(&self) -> u64 {
        self.now / self.subframes_per_frame
    }

    pub fn is_frame_start(&self) -> bool {
        self.now % self.subframes_per_frame == 0
    }

    pub fn subframe_seconds(&self) -> f64 {
        SUBFRAME_SECONDS
    }

    pub fn tick(&mut self) {
        self.now += 1;
    }
}

impl Default for Clock {
    fn default() -> Self {
        Clock::new(10)
    }
}

/// An arriving job. Rates are not part of the packet: they are snapshotted
/// from the current frame's [`RateMatrix`] when the packet is scheduled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub id: PacketId,
    /// Arrival subframe.
    pub arrival: u64,
    /// Absolute expiry subframe; the packet must finish transmitting in a
    /// subframe strictly before this one.
    pub expiry: u64,
    /// Destination subscriber, 0-based.
    pub subscriber: usize,
    pub length_bits: u64,
    /// Zero for URLLC packets, which are accounted by loss instead.
    pub reward: f64,
    pub urllc: bool,
}

impl Packet {
    pub fn time_to_expiry(&self, now: u64) -> TimeToExpiry {
        TimeToExpiry(self.expiry as i64 - now as i64)
    }

    pub fn length_bytes(&self) -> f64 {
        self.length_bits as f64 / BITS_PER_BYTE as f64
    }

    /// Reward per bit, the `w/l` factor of the reward rate.
    pub fn reward_per_bit(&self) -> f64 {
        self.reward / self.length_bits as f64
    }

    /// Deadline window the packet was given at arrival, in subframes.
    pub fn lifetime(&self) -> u64 {
        self.expiry - self.arrival
    }
}

/// Subframes remaining before expiry. Non-positive means expired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimeToExpiry(pub i64);

impl TimeToExpiry {
    pub fn is_expired(&self) -> bool {
        self.0 <= 0
    }

    pub fn subframes(&self) -> i64 {
        self.0
    }
}

/// Fraction of each frame's time a packet holds on every RB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub owner: PacketId,
    pub x: Vec<f64>,
}

impl Allocation {
    pub fn new(owner: PacketId, x: Vec<f64>) -> Self {
        debug_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)), "allocation out of [0,1]: {x:?}");
        Allocation { owner, x }
    }

    pub fn full(owner: PacketId, rbs: usize) -> Self {
        Allocation::new(owner, vec![1.0; rbs])
    }

    pub fn empty(owner: PacketId, rbs: usize) -> Self {
        Allocation::new(owner, vec![0.0; rbs])
    }

    pub fn is_binary(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn is_empty(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0)
    }

    /// Allocated rate `xᵀr`.
    pub fn rate(&self, rates: &[f64]) -> f64 {
        dot(&self.x, rates)
    }
}

/// Per-(subscriber, RB) transmission rates in bits per subframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    subscribers: usize,
    rbs: usize,
    rates: Vec<f64>,
}

impl RateMatrix {
    pub fn new(subscribers: usize, rbs: usize, rates: Vec<f64>) -> Result<Self, ModelError> {
        if rates.len() != subscribers * rbs {
            return Err(ModelError::DimensionMismatch {
                expected: subscribers * rbs,
                got: rates.len(),
            });
        }
        assert!(
            rates.iter().all(|r| r.is_finite() && *r >= 0.0),
            "rates must be finite and nonnegative"
        );
        Ok(RateMatrix {
            subscribers,
            rbs,
            rates,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let subscribers = rows.len();
        let rbs = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != rbs) {
            return Err(ModelError::DimensionMismatch {
                expected: rbs,
                got: bad.len(),
            });
        }
        RateMatrix::new(subscribers, rbs, rows.into_iter().flatten().collect())
    }

    pub fn subscribers(&self) -> usize {
        self.subscribers
    }

    pub fn rbs(&self) -> usize {
        self.rbs
    }

    pub fn row(&self, subscriber: usize) -> &[f64] {
        &self.rates[subscriber * self.rbs..(subscriber + 1) * self.rbs]
    }

    pub fn get(&self, subscriber: usize, rb: usize) -> f64 {
        self.rates[subscriber * self.rbs + rb]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum average rate `l / (e - t)` that delivers `length_bits` by `expiry`.
pub fn min_rate(length_bits: f64, expiry: u64, now: u64) -> Result<f64, ModelError> {
    if expiry <= now {
        return Err(ModelError::Expired { expiry, now });
    }
    Ok(length_bits / (expiry - now) as f64)
}

/// Minimum rate after the two-subframe correction for the later packet of a
/// time-shared pair. `slack` is true when the shared RB gives the later
/// packet at least two spare subframes, so no correction is needed.
/// Returns `None` when the window is too short to absorb the correction.
pub fn adjusted_min_rate(length_bits: f64, remaining: u64, slack: bool) -> Option<f64> {
    assert!(remaining >= 1, "time to expiry must be at least one subframe");
    if slack {
        Some(length_bits / remaining as f64)
    } else if remaining > 2 {
        Some(length_bits / (remaining - 2) as f64)
    } else {
        None
    }
}

/// `(w / l) · xᵀr`.
pub fn reward_rate(reward: f64, length_bits: f64, x: &[f64], rates: &[f64]) -> f64 {
    assert_eq!(x.len(), rates.len(), "allocation and rate vector lengths differ");
    reward / length_bits * dot(x, rates)
}

/// A URLLC transmission overlaid on some RBs for `duration` subframes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub rbs: Vec<bool>,
    pub duration: u64,
}

/// Rates seen by a packet with `remaining` subframes to expiry once the given
/// punctures are applied: RB `k` loses the fraction `duration / remaining`
/// of its time for every puncture covering it, floored at zero.
pub fn effective_rate_after_puncture(rates: &[f64], punctures: &[Puncture], remaining: u64) -> Vec<f64> {
    assert!(remaining >= 1, "time to expiry must be at least one subframe");
    rates
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let lost: f64 = punctures
                .iter()
                .filter(|p| p.rbs[k])
                .map(|p| p.duration as f64 / remaining as f64)
                .sum();
            (r * (1.0 - lost)).max(0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn min_rate_examples() {
        assert_eq!(min_rate(100.0, 15, 10), Ok(20.0));
        assert_eq!(min_rate(100.0, 11, 10), Ok(100.0));
        assert_eq!(min_rate(100.0, 10, 10), Err(ModelError::Expired { expiry: 10, now: 10 }));
    }

    #[test]
    fn adjusted_min_rate_branches() {
        assert_eq!(adjusted_min_rate(100.0, 5, true), Some(20.0));
        assert_eq!(adjusted_min_rate(100.0, 5, false), Some(100.0 / 3.0));
        assert_eq!(adjusted_min_rate(100.0, 2, false), None);
        assert_eq!(adjusted_min_rate(100.0, 1, false), None);
    }

    #[test]
    fn reward_rate_examples() {
        assert_eq!(reward_rate(4.0, 2.0, &[1.0, 0.0, 1.0], &[3.0, 5.0, 7.0]), 20.0);
        assert_eq!(reward_rate(1.0, 1.0, &[0.0, 0.0], &[8.0, 9.0]), 0.0);
        assert_eq!(reward_rate(1.0, 1.0, &[0.5], &[10.0]), 5.0);
    }

    #[test]
    fn puncture_examples() {
        let p = Puncture {
            rbs: vec![true, false],
            duration: 2,
        };
        assert_eq!(effective_rate_after_puncture(&[10.0, 10.0], &[p], 10), vec![8.0, 10.0]);
        assert_eq!(effective_rate_after_puncture(&[10.0], &[], 10), vec![10.0]);
        let full = Puncture {
            rbs: vec![true],
            duration: 10,
        };
        assert_eq!(effective_rate_after_puncture(&[10.0], &[full], 10), vec![0.0]);
    }

    #[test]
    fn clock_frames() {
        let mut c = Clock::default();
        assert!(c.is_frame_start());
        for _ in 0..13 {
            c.tick();
        }
        assert_eq!(c.frame_index(), 1);
        assert!(!c.is_frame_start());
    }

    #[test]
    fn rate_matrix_rejects_ragged_rows() {
        assert!(RateMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]).is_err());
        let m = RateMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.get(0, 1), 2.0);
    }

    proptest! {
        #[test]
        fn min_rate_strictly_decreasing(len in 1.0f64..1e5, now in 0u64..1000, gap in 1u64..500) {
            let a = min_rate(len, now + gap, now).unwrap();
            let b = min_rate(len, now + gap + 1, now).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn adjusted_without_slack_dominates(len in 1.0f64..1e5, d in 3u64..1000) {
            let tight = adjusted_min_rate(len, d, false).unwrap();
            let loose = adjusted_min_rate(len, d, true).unwrap();
            prop_assert!(tight >= loose);
        }

        #[test]
        fn reward_rate_is_linear(
            w in 0.0f64..100.0,
            l in 1.0f64..100.0,
            pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..1e4), 1..8),
            alpha in 0.0f64..=1.0,
        ) {
            let x1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let x2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let r: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            let mix: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let lhs = reward_rate(w, l, &mix, &r);
            let rhs = alpha * reward_rate(w, l, &x1, &r) + (1.0 - alpha) * reward_rate(w, l, &x2, &r);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn puncture_never_raises_rates(
            rates in prop::collection::vec(0.0f64..1e4, 1..6),
            duration in 1u64..5,
            extra in 0u64..20,
            mask_bits in any::<u8>(),
        ) {
            let remaining = duration + extra;
            let rbs: Vec<bool> = (0..rates.len()).map(|k| mask_bits >> k & 1 == 1).collect();
            let eff = effective_rate_after_puncture(&rates, &[Puncture { rbs, duration }], remaining);
            for (e, r) in eff.iter().zip(&rates) {
                prop_assert!(*e <= *r && *e >= 0.0);
            }
            prop_assert_eq!(effective_rate_after_puncture(&rates, &[], remaining), rates);
        }
    }
}
