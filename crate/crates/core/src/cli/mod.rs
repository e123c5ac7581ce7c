//! The `crit` command line: sampling, estimation, oracle tables and the
//! acceptance suite.

pub mod acceptance;
pub mod archive;
pub mod config;
pub mod estimate;
pub mod runner;

use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{CritError, Result};
use acceptance::{run_acceptance, Context, Plan, Status, Tier};
use config::RunConfig;
use estimate::{parse_points, run_estimate, write_rows, EstimateOptions, Kind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Seed of the acceptance suite when `--seed` is absent.
pub const ACCEPTANCE_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "crit", version, about = "Critical 2D Ising magnetization field laboratory")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to CRIT_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (or file, for `acceptance`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the chains of a config and write a sample archive.
    Sample,
    /// Print a CSV table of one estimator over archive directories.
    Estimate {
        #[arg(value_enum)]
        kind: Kind,
        inputs: Vec<PathBuf>,
        /// k-point locations, `x,y;x,y`.
        #[arg(long)]
        points: Option<String>,
        /// Inverse block scale for `blocks`.
        #[arg(long, default_value_t = 2)]
        rho_inv: usize,
        /// Inverse sub-block scale for `blocks`.
        #[arg(long, default_value_t = 4)]
        eps_inv: usize,
        /// Kernel exponent for `riesz`.
        #[arg(long, default_value_t = 0.25)]
        exponent: f64,
    },
    /// Print the exact small-graph reference values as CSV.
    Oracle,
    /// Run the acceptance suite and emit a JSON report.
    Acceptance {
        #[arg(long, value_enum, default_value_t = Tier::Fast)]
        tier: Tier,
    },
}

/// Maps an error to the exit code of its class.
pub fn exit_code(err: &CritError) -> i32 {
    match err {
        CritError::Io(_) => EXIT_IO,
        CritError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let Some(path) = &cli.config else {
        return Err(CritError::InvalidArgument("sample needs --config PATH".into()));
    };
    let text = std::fs::read_to_string(path)?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let threads = runner::resolve_threads(cli.threads);
    match &cli.command {
        Command::Sample => {
            let cfg = load_config(&cli)?;
            let pool = runner::thread_pool(threads)?;
            let dir = archive::default_dir(&cfg);
            let manifest = archive::write_archive(&cfg, &dir, &pool)?;
            eprintln!("wrote {} files to {}", manifest.files.len(), dir.display());
        }
        Command::Estimate { kind, inputs, points, rho_inv, eps_inv, exponent } => {
            let mut opts = EstimateOptions { rho_inv: *rho_inv, eps_inv: *eps_inv, exponent: *exponent, ..Default::default() };
            if let Some(p) = points {
                opts.points = parse_points(p)?;
            }
            let rows = run_estimate(*kind, inputs, &opts)?;
            write_rows(&rows, std::io::stdout().lock())?;
        }
        Command::Oracle => {
            let values = crate::oracle::golden_values()?;
            match &cli.out {
                Some(path) => crate::oracle::write_golden_csv(&values, BufWriter::new(std::fs::File::create(path)?))?,
                None => crate::oracle::write_golden_csv(&values, std::io::stdout().lock())?,
            }
        }
        Command::Acceptance { tier } => {
            let pool = runner::thread_pool(threads)?;
            let ctx = Context { seed: cli.seed.unwrap_or(ACCEPTANCE_SEED), pool: &pool, plan: Plan::full() };
            let report = run_acceptance(&ctx, *tier, &mut |r| eprintln!("{}", r.line()))?;
            let json = serde_json::to_string_pretty(&report)?;
            match &cli.out {
                Some(path) => std::fs::write(path, json)?,
                None => {
                    let mut out = std::io::stdout().lock();
                    writeln!(out, "{json}")?;
                }
            }
            let failed = report.criteria.iter().any(|c| c.status == Status::Fail);
            return Ok(if failed { EXIT_ACCEPTANCE_FAILED } else { EXIT_OK });
        }
    }
    Ok(EXIT_OK)
}
