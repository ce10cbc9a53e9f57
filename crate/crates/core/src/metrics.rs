//! Utility and per-run counters, aggregated across replications.

use crate::policies::ScheduleDecision;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no non-URLLC reward arrived; utility is undefined")]
    NoTraffic,
}

/// Delivered over arrived non-URLLC reward.
pub fn utility(delivered: &[f64], arrived: &[f64]) -> Result<f64, MetricsError> {
    utility_from_sums(delivered.iter().sum(), arrived.iter().sum())
}

pub fn utility_from_sums(delivered: f64, arrived: f64) -> Result<f64, MetricsError> {
    if arrived <= 0.0 {
        return Err(MetricsError::NoTraffic);
    }
    Ok(delivered / arrived)
}

pub type Histogram = BTreeMap<usize, u64>;

/// Decisions counted by how many packets each one added.
pub fn added_packets_histogram(decisions: &[ScheduleDecision]) -> Histogram {
    let mut h = Histogram::new();
    for d in decisions {
        *h.entry(d.added_count).or_default() += 1;
    }
    h
}

/// Share of decisions that added at most `size` packets.
pub fn histogram_share_up_to(h: &Histogram, size: usize) -> f64 {
    let total: u64 = h.values().sum();
    if total == 0 {
        return 0.0;
    }
    h.range(..=size).map(|(_, c)| c).sum::<u64>() as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Claim2Summary {
    pub pairs: u64,
    /// Pairs touched by a URLLC puncture; the bound does not apply to them.
    pub punctured: u64,
    pub violations: u64,
}

/// Accounting for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: String,
    pub seed: u64,
    pub lambda: f64,
    /// `None` when no non-URLLC reward arrived.
    pub utility: Option<f64>,
    pub delivered_reward: f64,
    pub arrived_reward: f64,
    pub delivered_bytes_fraction: Option<f64>,
    pub arrived: u64,
    pub delivered: u64,
    pub expired: u64,
    pub urllc_sent: u64,
    pub urllc_missed: u64,
    pub urllc_overloads: u64,
    pub victims_dropped: u64,
    pub decisions: u64,
    pub histogram: Histogram,
    pub claim2: Claim2Summary,
    pub subframes: u64,
    pub invariant_failures: u64,
    /// Time spent inside the policy, milliseconds. Not reproducible.
    pub policy_ms: f64,
}

impl SimReport {
    /// The report with its timing zeroed, for replay comparisons.
    pub fn without_timing(mut self) -> Self {
        self.policy_ms = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    /// Half-width of the 95% confidence interval on the mean.
    pub ci95: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Stats {
                n,
                mean,
                std: 0.0,
                ci95: 0.0,
            });
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        Some(Stats {
            n,
            mean,
            std,
            ci95: t_critical_975(n - 1) * std / (n as f64).sqrt(),
        })
    }
}

/// Two-sided 95% Student-t critical value.
pub fn t_critical_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
        2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    match df {
        0 => f64::NAN,
        1..=30 => TABLE[df - 1],
        31..=40 => 2.021,
        41..=60 => 2.000,
        61..=120 => 1.980,
        _ => 1.960,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policy: String,
    pub lambda: f64,
    pub runs: usize,
    pub utility: Option<Stats>,
    pub delivered_bytes_fraction: Option<Stats>,
    pub urllc_missed: Stats,
}

/// Per-(policy, lambda) statistics, sorted by policy then lambda. Reports are
/// ordered by seed within each group first, so the result does not depend on
/// input order.
pub fn aggregate(reports: &[SimReport]) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, u64), Vec<&SimReport>> = BTreeMap::new();
    for r in reports {
        groups.entry((r.policy.clone(), r.lambda.to_bits())).or_default().push(r);
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort_by_key(|r| r.seed);
            let utilities: Vec<f64> = g.iter().filter_map(|r| r.utility).collect();
            let bytes: Vec<f64> = g.iter().filter_map(|r| r.delivered_bytes_fraction).collect();
            let missed: Vec<f64> = g.iter().map(|r| r.urllc_missed as f64).collect();
            Summary {
                policy: g[0].policy.clone(),
                lambda: g[0].lambda,
                runs: g.len(),
                utility: Stats::of(&utilities),
                delivered_bytes_fraction: Stats::of(&bytes),
                urllc_missed: Stats::of(&missed).expect("group is non-empty"),
            }
        })
        .collect()
}

/// One line of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub policy: String,
    pub lambda: f64,
    pub utility: Option<f64>,
    pub delivered_bytes_fraction: Option<f64>,
    pub urllc_missed: u64,
    /// JSON object mapping decision size to count.
    pub decision_histogram: String,
    pub wall_ms: Option<f64>,
}

impl RunRow {
    pub fn new(report: &SimReport, wall_ms: Option<f64>) -> Self {
        RunRow {
            seed: report.seed,
            policy: report.policy.clone(),
            lambda: report.lambda,
            utility: report.utility,
            delivered_bytes_fraction: report.delivered_bytes_fraction,
            urllc_missed: report.urllc_missed,
            decision_histogram: serde_json::to_string(&report.histogram).expect("histogram serializes"),
            wall_ms,
        }
    }

    pub fn histogram(&self) -> Result<Histogram, serde_json::Error> {
        serde_json::from_str(&self.decision_histogram)
    }
}

/// One line of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: String,
    pub lambda: f64,
    pub runs: usize,
    pub utility_mean: Option<f64>,
    pub utility_std: Option<f64>,
    pub utility_ci95: Option<f64>,
    pub delivered_bytes_mean: Option<f64>,
    pub urllc_missed_mean: f64,
}

impl From<&Summary> for SummaryRow {
    fn from(s: &Summary) -> Self {
        SummaryRow {
            policy: s.policy.clone(),
            lambda: s.lambda,
            runs: s.runs,
            utility_mean: s.utility.map(|u| u.mean),
            utility_std: s.utility.map(|u| u.std),
            utility_ci95: s.utility.map(|u| u.ci95),
            delivered_bytes_mean: s.delivered_bytes_fraction.map(|u| u.mean),
            urllc_missed_mean: s.urllc_missed.mean,
        }
    }
}

/// Rebuilds minimal reports from CSV rows so they can be re-aggregated.
pub fn reports_from_rows(rows: &[RunRow]) -> Vec<SimReport> {
    rows.iter()
        .map(|r| SimReport {
            policy: r.policy.clone(),
            seed: r.seed,
            lambda: r.lambda,
            utility: r.utility,
            delivered_reward: 0.0,
            arrived_reward: 0.0,
            delivered_bytes_fraction: r.delivered_bytes_fraction,
            arrived: 0,
            delivered: 0,
            expired: 0,
            urllc_sent: 0,
            urllc_missed: r.urllc_missed,
            urllc_overloads: 0,
            victims_dropped: 0,
            decisions: 0,
            histogram: r.histogram().unwrap_or_default(),
            claim2: Claim2Summary::default(),
            subframes: 0,
            invariant_failures: 0,
            policy_ms: 0.0,
        })
        .collect()
}
