//! Replication × policy × lambda sweep and its CSV outputs.

use super::config::RunConfig;
use crate::metrics::{aggregate, RunRow, SimReport, SummaryRow};
use crate::policies::PolicyKind;
use crate::sim::{run_with_events, write_events, Event};
use crate::traffic::TrafficConfig;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const WORKERS_ENV: &str = "MRRSCHED_WORKERS";
pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub policy: PolicyKind,
    pub lambda: f64,
    pub seed: u64,
}

pub struct Outcome {
    pub report: SimReport,
    pub wall_ms: f64,
    pub events: Vec<Event>,
}

pub fn jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &policy in &cfg.policies {
        for &lambda in &cfg.lambda_sweep {
            for seed in cfg.seeds() {
                jobs.push(Job { policy, lambda, seed });
            }
        }
    }
    jobs
}

pub fn run_job(cfg: &RunConfig, job: Job) -> Outcome {
    let traffic = TrafficConfig {
        arrival_rate: job.lambda,
        ..cfg.traffic.clone()
    };
    let mut opts = cfg.sim.clone();
    opts.record_events |= cfg.event_log;
    let t0 = Instant::now();
    let (report, events) = run_with_events(job.policy, &traffic, &cfg.channel, job.seed, &opts);
    Outcome {
        report,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        events,
    }
}

/// Worker count from the environment; `None` means the pool default.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub fn run_sequential(cfg: &RunConfig) -> Vec<Outcome> {
    sorted(jobs(cfg).into_iter().map(|j| run_job(cfg, j)).collect())
}

#[cfg(feature = "parallel")]
pub fn run_parallel(cfg: &RunConfig, workers: Option<usize>) -> Vec<Outcome> {
    use rayon::prelude::*;
    let jobs = jobs(cfg);
    let go = || jobs.par_iter().map(|&j| run_job(cfg, j)).collect::<Vec<_>>();
    let out = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(go),
        None => go(),
    };
    sorted(out)
}

/// Runs the whole grid, in parallel when the feature is on.
pub fn run_grid(cfg: &RunConfig) -> Vec<Outcome> {
    #[cfg(feature = "parallel")]
    {
        run_parallel(cfg, workers_from_env())
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(cfg)
    }
}

fn sorted(mut out: Vec<Outcome>) -> Vec<Outcome> {
    out.sort_by(|a, b| {
        let (a, b) = (&a.report, &b.report);
        a.policy
            .cmp(&b.policy)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.seed.cmp(&b.seed))
    });
    out
}

fn event_file_name(r: &SimReport) -> String {
    format!("{}_{}_{}.jsonl", r.policy.replace(':', "-"), r.lambda, r.seed)
}

/// Writes the run and summary CSVs plus any event logs. Returns the paths
/// written.
pub fn write_outputs(cfg: &RunConfig, outcomes: &[Outcome]) -> io::Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let runs_path = dir.join(RUNS_CSV);
    let mut w = csv::Writer::from_path(&runs_path)?;
    for o in outcomes {
        let wall = cfg.record_wall_time.then_some(o.wall_ms);
        w.serialize(RunRow::new(&o.report, wall))?;
    }
    w.flush()?;

    let reports: Vec<SimReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let summary_path = dir.join(SUMMARY_CSV);
    write_summary(&summary_path, &reports)?;

    let mut written = vec![runs_path, summary_path];
    if cfg.event_log {
        let events_dir = dir.join("events");
        fs::create_dir_all(&events_dir)?;
        for o in outcomes {
            let path = events_dir.join(event_file_name(&o.report));
            let mut f = BufWriter::new(File::create(&path)?);
            write_events(&o.events, &mut f)?;
            f.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn write_summary(path: &Path, reports: &[SimReport]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in aggregate(reports) {
        w.serialize(SummaryRow::from(&s))?;
    }
    w.flush()
}
