//! Scheduling policies. Each maps the eligible queue heads, their current
//! rates and the set of free RBs to a [`ScheduleDecision`].

mod baselines;
mod mrr;
pub mod urllc;

pub use baselines::{edf_select, mlwdf_metric, mlwdf_select, mxrate_select, MlwdfParams};
pub use mrr::{mrr_ilp_select, mrr_lp2_select, mud_select};
pub use urllc::{
    urllc_exhaustive_oracle, urllc_preempt, InflightView, UrllcAssignment, UrllcOracleOutcome, UrllcOverlay,
    URLLC_ORACLE_MAX_CELLS,
};

use crate::model::{Allocation, Packet, PacketId};
use crate::solver::SolverError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("no packet can be scheduled")]
    EmptyDecision,
    #[error("URLLC packet {0} cannot reach its minimum rate")]
    UrllcOverload(PacketId),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A queue head offered to a policy, with its subscriber's current rates.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub packet: &'a Packet,
    pub rates: &'a [f64],
}

/// What a policy may look at besides the candidates.
#[derive(Debug, Clone, Copy)]
pub struct SchedContext<'a> {
    pub now: u64,
    /// RBs no in-flight packet holds and no URLLC packet punctures.
    pub free: &'a [bool],
    /// Smoothed served bits per subframe, per subscriber.
    pub avg_throughput: &'a [f64],
    pub mlwdf: MlwdfParams,
}

impl SchedContext<'_> {
    pub fn rbs(&self) -> usize {
        self.free.len()
    }

    pub fn free_rbs(&self) -> Vec<usize> {
        (0..self.free.len()).filter(|&k| self.free[k]).collect()
    }
}

/// Packets admitted by one policy invocation and the RB shares they get.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    /// Sorted ascending.
    pub chosen: Vec<PacketId>,
    /// One per chosen packet, same order, over all K RBs.
    pub allocations: Vec<Allocation>,
    pub total_rr: f64,
    pub added_count: usize,
}

impl ScheduleDecision {
    fn from_allocations(mut allocations: Vec<Allocation>, candidates: &[Candidate]) -> Self {
        allocations.sort_by_key(|a| a.owner);
        let total_rr = allocations
            .iter()
            .map(|a| {
                let c = candidates.iter().find(|c| c.packet.id == a.owner).expect("owner is a candidate");
                c.packet.reward_per_bit() * a.rate(c.rates)
            })
            .sum();
        ScheduleDecision {
            chosen: allocations.iter().map(|a| a.owner).collect(),
            added_count: allocations.len(),
            allocations,
            total_rr,
        }
    }

    /// Per-RB shares sum to at most one, and only free RBs are used.
    pub fn check_exclusive(&self, free: &[bool]) -> Result<(), String> {
        for (k, &is_free) in free.iter().enumerate() {
            let s: f64 = self.allocations.iter().map(|a| a.x[k]).sum();
            if s > 1.0 + 1e-9 {
                return Err(format!("RB {k} allocated {s}"));
            }
            if !is_free && s > 0.0 {
                return Err(format!("RB {k} is not free but was allocated"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    MrrLp2,
    MrrIlp(usize),
    Edf,
    MxRate,
    Mud,
    Mlwdf,
}

impl PolicyKind {
    pub fn select(&self, eligible: &[Candidate], ctx: &SchedContext) -> Result<ScheduleDecision, PolicyError> {
        match *self {
            PolicyKind::MrrLp2 => mrr_lp2_select(eligible, ctx),
            PolicyKind::MrrIlp(p) => mrr_ilp_select(eligible, ctx, p),
            PolicyKind::Edf => edf_select(eligible, ctx),
            PolicyKind::MxRate => mxrate_select(eligible, ctx),
            PolicyKind::Mud => mud_select(eligible, ctx),
            PolicyKind::Mlwdf => mlwdf_select(eligible, ctx),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::MrrLp2 => write!(f, "mrr-lp2"),
            PolicyKind::MrrIlp(p) => write!(f, "mrr-ilp:{p}"),
            PolicyKind::Edf => write!(f, "edf"),
            PolicyKind::MxRate => write!(f, "mxrate"),
            PolicyKind::Mud => write!(f, "mud"),
            PolicyKind::Mlwdf => write!(f, "mlwdf"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mrr-lp2" => Ok(PolicyKind::MrrLp2),
            "edf" => Ok(PolicyKind::Edf),
            "mxrate" => Ok(PolicyKind::MxRate),
            "mud" => Ok(PolicyKind::Mud),
            "mlwdf" => Ok(PolicyKind::Mlwdf),
            _ => match s.strip_prefix("mrr-ilp:").map(str::parse::<usize>) {
                Some(Ok(p)) if p >= 1 => Ok(PolicyKind::MrrIlp(p)),
                _ => Err(format!("unknown policy {s:?}")),
            },
        }
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(p: PolicyKind) -> String {
        p.to_string()
    }
}
