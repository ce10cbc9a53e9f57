//! Seeded open-loop Poisson packet stream drawn from a class mixture.

use crate::model::{Packet, PacketId, BITS_PER_BYTE, SUBFRAME_SECONDS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// Shortest window, in subframes, given to a non-URLLC packet.
pub const MIN_DEADLINE_SUBFRAMES: u64 = 2;
pub const MIN_URLLC_DEADLINE_SUBFRAMES: u64 = 1;

/// RNG stream for traffic, disjoint from the channel's placement and
/// per-frame streams under the same seed.
const TRAFFIC_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LengthDist {
    Constant { bytes: u64 },
    /// Inclusive on both ends.
    Uniform { min: u64, max: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DeadlineDist {
    Constant { seconds: f64 },
    /// Exponential with parameter `param`, read as mean or rate according
    /// to [`TrafficConfig::exp_param`].
    Exponential { param: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Priority {
    PerByte { value: f64 },
    Urllc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExpParam {
    #[default]
    Mean,
    Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficClass {
    pub name: String,
    pub share: f64,
    pub length: LengthDist,
    pub deadline: DeadlineDist,
    pub priority: Priority,
}

impl TrafficClass {
    pub fn is_urllc(&self) -> bool {
        matches!(self.priority, Priority::Urllc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Mean arrivals per second.
    pub arrival_rate: f64,
    pub mixture: Vec<TrafficClass>,
    pub total_packets: usize,
    pub exp_param: ExpParam,
    pub seed: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            arrival_rate: 4000.0,
            mixture: default_mixture(),
            total_packets: 5000,
            exp_param: ExpParam::Mean,
            seed: 0,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(format!("traffic.arrival_rate must be positive, got {}", self.arrival_rate));
        }
        if self.mixture.is_empty() {
            return Err("traffic.mixture is empty".into());
        }
        let total: f64 = self.mixture.iter().map(|c| c.share).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(format!("traffic.mixture shares sum to {total}, expected 1"));
        }
        for c in &self.mixture {
            if !(c.share > 0.0 && c.share <= 1.0) {
                return Err(format!("class {} share {} outside (0, 1]", c.name, c.share));
            }
            match c.length {
                LengthDist::Constant { bytes } if bytes == 0 => {
                    return Err(format!("class {} has zero length", c.name));
                }
                LengthDist::Uniform { min, max } if min == 0 || min > max => {
                    return Err(format!("class {} has bad length range {min}..={max}", c.name));
                }
                _ => {}
            }
            match c.deadline {
                DeadlineDist::Constant { seconds } if !(seconds > 0.0) => {
                    return Err(format!("class {} has non-positive deadline", c.name));
                }
                DeadlineDist::Exponential { param } if !(param > 0.0) => {
                    return Err(format!("class {} has non-positive deadline parameter", c.name));
                }
                _ => {}
            }
            if let Priority::PerByte { value } = c.priority {
                if !(value >= 0.0) {
                    return Err(format!("class {} has negative priority", c.name));
                }
            }
        }
        Ok(())
    }
}

/// The six-class mixture: URLLC plus five deadline/priority classes.
pub fn default_mixture() -> Vec<TrafficClass> {
    let class = |name: &str, share, length, deadline, priority| TrafficClass {
        name: name.to_string(),
        share,
        length,
        deadline,
        priority,
    };
    let exp = |param| DeadlineDist::Exponential { param };
    let per_byte = |value| Priority::PerByte { value };
    vec![
        class(
            "urllc",
            0.08,
            LengthDist::Constant { bytes: 32 },
            DeadlineDist::Constant { seconds: 0.0005 },
            Priority::Urllc,
        ),
        class("type1", 0.138, LengthDist::Constant { bytes: 64 }, exp(0.1), per_byte(4.0)),
        class("type2", 0.322, LengthDist::Uniform { min: 64, max: 100 }, exp(0.2), per_byte(1.0)),
        class("type3", 0.046, LengthDist::Uniform { min: 100, max: 1400 }, exp(0.2), per_byte(2.0)),
        class("type4", 0.184, LengthDist::Uniform { min: 100, max: 1400 }, exp(0.3), per_byte(1.0)),
        class("type5", 0.23, LengthDist::Constant { bytes: 1500 }, exp(0.4), per_byte(1.0)),
    ]
}

/// Draws the packet stream, sorted by arrival. Packet ids are 0, 1, 2, … in
/// arrival order; subscribers are 0-based.
pub fn generate_stream(cfg: &TrafficConfig, subscribers: usize) -> Vec<Packet> {
    generate_labeled(cfg, subscribers).into_iter().map(|(p, _)| p).collect()
}

/// [`generate_stream`] with each packet's index into the mixture.
pub fn generate_labeled(cfg: &TrafficConfig, subscribers: usize) -> Vec<(Packet, usize)> {
    assert!(subscribers >= 1, "need at least one subscriber");
    cfg.validate().expect("invalid traffic configuration");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(TRAFFIC_STREAM);
    let gaps = Exp::new(cfg.arrival_rate).expect("positive arrival rate");
    let cumulative: Vec<f64> = cfg
        .mixture
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c.share;
            Some(*acc)
        })
        .collect();

    let mut t = 0.0;
    let mut out = Vec::with_capacity(cfg.total_packets);
    for i in 0..cfg.total_packets {
        t += gaps.sample(&mut rng);
        let u: f64 = rng.random();
        let idx = cumulative.iter().position(|&c| u < c).unwrap_or(cfg.mixture.len() - 1);
        let class = &cfg.mixture[idx];
        let subscriber = rng.random_range(0..subscribers);
        let bytes = match class.length {
            LengthDist::Constant { bytes } => bytes,
            LengthDist::Uniform { min, max } => rng.random_range(min..=max),
        };
        let deadline_s = match class.deadline {
            DeadlineDist::Constant { seconds } => seconds,
            DeadlineDist::Exponential { param } => {
                let rate = match cfg.exp_param {
                    ExpParam::Mean => 1.0 / param,
                    ExpParam::Rate => param,
                };
                Exp::new(rate).expect("positive deadline rate").sample(&mut rng)
            }
        };
        let floor = if class.is_urllc() {
            MIN_URLLC_DEADLINE_SUBFRAMES
        } else {
            MIN_DEADLINE_SUBFRAMES
        };
        let window = ((deadline_s / SUBFRAME_SECONDS).floor() as u64).max(floor);
        let arrival = (t / SUBFRAME_SECONDS).floor() as u64;
        let reward = match class.priority {
            Priority::PerByte { value } => value * bytes as f64,
            Priority::Urllc => 0.0,
        };
        let packet = Packet {
            id: PacketId(i as u64),
            arrival,
            expiry: arrival + window,
            subscriber,
            length_bits: bytes * BITS_PER_BYTE,
            reward,
            urllc: class.is_urllc(),
        };
        out.push((packet, idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> TrafficConfig {
        TrafficConfig {
            arrival_rate: 4000.0,
            total_packets: n,
            seed: 21,
            ..TrafficConfig::default()
        }
    }

    #[test]
    fn class_shares_match_mixture() {
        let labeled = generate_labeled(&cfg(100_000), 24);
        let mixture = default_mixture();
        let mut counts = vec![0usize; mixture.len()];
        for (_, class) in &labeled {
            counts[*class] += 1;
        }
        for (c, n) in mixture.iter().zip(counts) {
            let f = n as f64 / labeled.len() as f64;
            assert!((f - c.share).abs() < 0.01, "{}: {f} vs {}", c.name, c.share);
        }
    }

    #[test]
    fn type2_lengths_within_range() {
        let labeled = generate_labeled(&cfg(20_000), 24);
        let type2: Vec<&Packet> = labeled.iter().filter(|(_, c)| *c == 2).map(|(p, _)| p).collect();
        assert!(type2.len() > 5_000);
        assert!(type2.iter().all(|p| (64 * 8..=100 * 8).contains(&p.length_bits)));
    }

    #[test]
    fn mean_gap_matches_rate() {
        // subframe rounding hides the gaps, so check the span instead
        let n = 100_000;
        let stream = generate_stream(&cfg(n), 24);
        let span_s = stream.last().unwrap().arrival as f64 * SUBFRAME_SECONDS;
        let mean_gap = span_s / n as f64;
        assert!((mean_gap * 4000.0 - 1.0).abs() < 0.02, "mean gap {mean_gap}");
    }

    #[test]
    fn stream_sorted_reproducible_and_well_formed() {
        let a = generate_stream(&cfg(5_000), 8);
        assert_eq!(a, generate_stream(&cfg(5_000), 8));
        assert!(a.windows(2).all(|w| w[0].arrival <= w[1].arrival));
        for p in &a {
            assert!(p.expiry > p.arrival);
            assert!(p.subscriber < 8);
            if p.urllc {
                assert_eq!(p.expiry - p.arrival, 1);
                assert_eq!(p.reward, 0.0);
                assert_eq!(p.length_bits, 256);
            } else {
                assert!(p.expiry - p.arrival >= MIN_DEADLINE_SUBFRAMES);
            }
        }
    }

    #[test]
    fn type1_reward_spot_value() {
        let stream = generate_stream(&cfg(5_000), 8);
        let t1 = stream.iter().find(|p| p.length_bits == 512 && p.reward / 64.0 == 4.0).unwrap();
        assert_eq!(t1.reward, 256.0);
    }

    #[test]
    fn rejects_bad_mixture() {
        let mut c = cfg(10);
        c.mixture[0].share = 0.5;
        assert!(c.validate().is_err());
    }
}
