//! Seeded oracle suites behind `mrrsched verify`.

use super::config::{RunConfig, Scale};
use crate::model::PacketId;
use crate::policies::PolicyKind;
use crate::sim::run;
use crate::solver::oracle::{ilp_exhaustive_oracle, lp2_grid_oracle, subset_sum_partition};
use crate::solver::{partition_feasibility, solve_ilp_subset, solve_lp2, AllocationProblem, Demand, Solution, SolverError};
use crate::traffic::TrafficConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

const KEEP_FAILURES: usize = 5;

pub type IlpFn = fn(&AllocationProblem) -> Result<Solution, SolverError>;
pub type Lp2Fn = fn(&Demand, &Demand, usize) -> Result<Solution, SolverError>;
pub type PartitionFn = fn(&[u64]) -> Result<bool, SolverError>;

/// The solvers under test. Swapping one out lets tests check that the
/// suites notice a broken solver.
#[derive(Clone, Copy)]
pub struct Solvers {
    pub ilp: IlpFn,
    pub lp2: Lp2Fn,
    pub partition: PartitionFn,
}

impl Default for Solvers {
    fn default() -> Self {
        Solvers {
            ilp: solve_ilp_subset,
            lp2: solve_lp2,
            partition: partition_feasibility,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, outcome: Result<(), String>) {
        self.total += 1;
        match outcome {
            Ok(()) => self.passed += 1,
            Err(msg) if self.failures.len() < KEEP_FAILURES => self.failures.push(msg),
            Err(_) => {}
        }
    }

    pub fn ok(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.ok() { "ok" } else { "FAILED" };
        write!(f, "{:<18} {}/{} {tag}", self.name, self.passed, self.total)
    }
}

/// Small integer-valued instance: rates in 0..20, 1..3 bits, reward 0..4,
/// minimum rate 20–80% of the packet's total rate.
pub fn random_demand(rng: &mut ChaCha8Rng, id: u64, rbs: usize) -> Demand {
    let rates: Vec<f64> = (0..rbs).map(|_| rng.random_range(0.0..20.0f64).round()).collect();
    let total: f64 = rates.iter().sum();
    Demand {
        id: PacketId(id),
        reward: rng.random_range(0..5) as f64,
        length_bits: rng.random_range(1..4) as f64,
        rates,
        min_rate: rng.random_range(0.2..0.8) * total.max(1.0),
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `ilp` against the exhaustive oracle on instances with K ≤ 4 and at most
/// three packets.
pub fn ilp_suite(ilp: IlpFn, seed: u64, instances: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("ilp-vs-exhaustive");
    for _ in 0..instances {
        let rbs = rng.random_range(1..=4);
        let n = rng.random_range(1..=3);
        let demands = (0..n).map(|i| random_demand(&mut rng, i, rbs)).collect();
        let p = AllocationProblem::new(demands, rbs).expect("generator yields valid problems");
        let outcome = match (ilp(&p), ilp_exhaustive_oracle(&p)) {
            (Ok(a), Ok(b)) if rel_close(a.total_rr, b.total_rr) => a.check(&p, 0.0),
            (Ok(a), Ok(b)) => Err(format!("objective {} vs oracle {}", a.total_rr, b.total_rr)),
            (Err(SolverError::Infeasible), Err(SolverError::Infeasible)) => Ok(()),
            (a, b) => Err(format!("solver {:?} vs oracle {:?}", a.map(|s| s.total_rr), b.map(|s| s.total_rr))),
        };
        res.record(outcome);
    }
    res
}

/// `lp2` against the 0.01 grid on two-packet instances with K ≤ 5: never
/// more than 1% below the grid and never off the constraints by more than
/// 1e-6.
pub fn lp2_suite(lp2: Lp2Fn, seed: u64, instances: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("lp2-vs-grid");
    for _ in 0..instances {
        let rbs = rng.random_range(1..=5);
        let a = random_demand(&mut rng, 1, rbs);
        let b = random_demand(&mut rng, 2, rbs);
        let p = AllocationProblem::new(vec![a.clone(), b.clone()], rbs).expect("valid");
        let outcome = match (lp2(&a, &b, rbs), lp2_grid_oracle(&a, &b, rbs, 0.01)) {
            (Ok(lp), grid) => lp.check(&p, 1e-6).and_then(|()| match grid {
                Ok(g) if lp.total_rr < g.total_rr - 1e-2 * g.total_rr.abs() => {
                    Err(format!("lp {} below grid {}", lp.total_rr, g.total_rr))
                }
                Ok(_) | Err(SolverError::Infeasible) => Ok(()),
                Err(e) => Err(format!("grid oracle failed: {e}")),
            }),
            (Err(SolverError::Infeasible), Ok(g)) => Err(format!("lp infeasible, grid found {}", g.total_rr)),
            (Err(SolverError::Infeasible), Err(SolverError::Infeasible)) => Ok(()),
            (Err(e), _) => Err(format!("lp failed: {e}")),
        };
        res.record(outcome);
    }
    res
}

/// `partition` against subset-sum DP on even-sum sets, n ≤ 12, values ≤ 50.
pub fn partition_suite(partition: PartitionFn, seed: u64, instances: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = SuiteResult::new("partition-vs-dp");
    for _ in 0..instances {
        let n = rng.random_range(1..=12);
        let mut values: Vec<u64> = (0..n).map(|_| rng.random_range(1..=50)).collect();
        if values.iter().sum::<u64>() % 2 == 1 {
            values[0] = if values[0] == 50 { 49 } else { values[0] + 1 };
        }
        let outcome = match (partition(&values), subset_sum_partition(&values)) {
            (Ok(a), Ok(b)) if a == b => Ok(()),
            (a, b) => Err(format!("{values:?}: reduction {a:?} vs dp {b:?}")),
        };
        res.record(outcome);
    }
    res
}

/// Full desk-scale mrr-lp2 simulations across the desk sweep; a run passes
/// when the pair monitor saw no violation.
pub fn claim2_suite(seeds: u64) -> SuiteResult {
    let cfg = RunConfig::preset(Scale::Desk);
    let mut res = SuiteResult::new("claim2-monitor");
    for &lambda in &cfg.lambda_sweep {
        let traffic = TrafficConfig {
            arrival_rate: lambda,
            ..cfg.traffic.clone()
        };
        for seed in cfg.base_seed..cfg.base_seed + seeds {
            let r = run(PolicyKind::MrrLp2, &traffic, &cfg.channel, seed, &cfg.sim);
            res.record(match r.claim2.violations {
                0 => Ok(()),
                v => Err(format!("lambda {lambda} seed {seed}: {v} violations over {} pairs", r.claim2.pairs)),
            });
        }
    }
    res
}

pub fn run_all(solvers: &Solvers) -> Vec<SuiteResult> {
    vec![
        ilp_suite(solvers.ilp, 1, 200),
        lp2_suite(solvers.lp2, 2, 200),
        partition_suite(solvers.partition, 3, 100),
        claim2_suite(4),
    ]
}
