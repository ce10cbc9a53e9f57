//! `mrrsched run | report | verify`.

pub mod config;
pub mod grid;
pub mod verify;

use crate::metrics::{aggregate, reports_from_rows, RunRow};
use clap::{Parser, Subcommand};
use config::{load_config, Overrides, Scale};
use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use verify::Solvers;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mrrsched", version, about = "Deadline-aware downlink scheduling experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the replication × policy × lambda grid described by a JSON config.
    Run {
        config: PathBuf,
        /// Base seed; replication i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        /// Size preset the config is layered over: desk or full.
        #[arg(long)]
        scale: Option<Scale>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a policy × lambda matrix of mean utility from run CSVs.
    Report { dir: PathBuf },
    /// Run the solver and simulator oracle suites.
    Verify,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, seed, scale, out } => cmd_run(&config, &Overrides { seed, scale, out }),
        Command::Report { dir } => cmd_report(&dir, &mut io::stdout().lock()),
        Command::Verify => cmd_verify(&Solvers::default(), &mut io::stdout().lock()),
    }
}

pub fn cmd_run(path: &Path, overrides: &Overrides) -> i32 {
    let cfg = match load_config(path, overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcomes = grid::run_grid(&cfg);
    match grid::write_outputs(&cfg, &outcomes) {
        Ok(paths) => {
            eprintln!("{} runs", outcomes.len());
            for p in paths.iter().take(2) {
                eprintln!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: writing results to {}: {e}", cfg.output_dir.display());
            EXIT_IO
        }
    }
}

/// Reads every per-run CSV directly inside `dir`. Files with a different
/// header (such as summary.csv) are skipped.
pub fn read_run_rows(dir: &Path) -> io::Result<Vec<RunRow>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(&p)?;
        let headers = r.headers()?.clone();
        if !["seed", "policy", "lambda", "utility"].iter().all(|h| headers.iter().any(|x| x == *h)) {
            continue;
        }
        for row in r.deserialize() {
            rows.push(row.map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", p.display())))?);
        }
    }
    Ok(rows)
}

pub fn cmd_report<W: Write>(dir: &Path, out: &mut W) -> i32 {
    let rows = match read_run_rows(dir) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: reading {}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    if rows.is_empty() {
        println!("no runs found");
        return EXIT_FAILED;
    }
    let summaries = aggregate(&reports_from_rows(&rows));
    let lambdas: BTreeSet<u64> = summaries.iter().map(|s| s.lambda.to_bits()).collect();
    let mut lambdas: Vec<f64> = lambdas.into_iter().map(f64::from_bits).collect();
    lambdas.sort_by(f64::total_cmp);
    let policies: BTreeSet<&str> = summaries.iter().map(|s| s.policy.as_str()).collect();

    let mut text = String::from("policy");
    for l in &lambdas {
        text += &format!(",{l}");
    }
    text.push('\n');
    for p in policies {
        text += p;
        for l in &lambdas {
            let cell = summaries
                .iter()
                .find(|s| s.policy == p && s.lambda == *l)
                .and_then(|s| s.utility)
                .map(|u| format!("{:.6}", u.mean))
                .unwrap_or_default();
            text += &format!(",{cell}");
        }
        text.push('\n');
    }
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_IO,
    }
}

pub fn cmd_verify<W: Write>(solvers: &Solvers, out: &mut W) -> i32 {
    let results = verify::run_all(solvers);
    let mut all_ok = true;
    for r in &results {
        all_ok &= r.ok();
        let _ = writeln!(out, "{r}");
        for f in &r.failures {
            let _ = writeln!(out, "    {f}");
        }
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
