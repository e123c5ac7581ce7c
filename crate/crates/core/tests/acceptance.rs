//! The full acceptance suite with one line per criterion, then a
//! deliberate-bug run that must be caught. Runs without the libtest harness
//! so the lines always reach the console.

use std::process::ExitCode;

use crit_core::cli::acceptance::{criterion_wu, run_acceptance, two_point_campaign, Context, Plan, Status, Tier};
use crit_core::cli::runner::{resolve_threads, thread_pool};
use crit_core::cli::ACCEPTANCE_SEED;

fn main() -> ExitCode {
    let pool = thread_pool(resolve_threads(None)).expect("worker pool");
    let ctx = Context { seed: ACCEPTANCE_SEED, pool: &pool, plan: Plan::full() };
    let report = run_acceptance(&ctx, Tier::Full, &mut |r| println!("{}", r.line())).expect("acceptance run");
    let failed: Vec<u32> = report.criteria.iter().filter(|c| c.status != Status::Pass).map(|c| c.id).collect();
    println!("acceptance: {} criteria, failing {failed:?}", report.criteria.len());

    // p = 1 − e^{−2β} = 1/2 instead of 2 − √2
    let plan = Plan { beta: std::f64::consts::LN_2 / 2.0, two_point_samples: 4_000, ..Plan::full() };
    let bugged = Context { seed: ACCEPTANCE_SEED, pool: &pool, plan };
    let r = criterion_wu(&two_point_campaign(&bugged).expect("campaign")).expect("criterion");
    let caught = r.status == Status::Fail;
    println!("mutation p=1/2: {} ({})", if caught { "caught" } else { "NOT caught" }, r.line());

    if failed.is_empty() && report.criteria.len() == 13 && caught {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
