use anyhow::Result;
use softlogic::verify::{run_all, run_check, VerifyOptions, CHECKS};

use crate::{usage, Status};

#[derive(clap::Args)]
pub struct Args {
    /// Run only this check (repeatable).
    #[arg(long)]
    only: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Corrupt one basis sign before the catalog check.
    #[arg(long)]
    inject_basis_fault: bool,
    /// Print the available check names and exit.
    #[arg(long)]
    list: bool,
}

pub fn run(args: Args) -> Result<Status> {
    if args.list {
        for name in CHECKS {
            println!("{name}");
        }
        return Ok(Status::Ok);
    }
    let opts = VerifyOptions { seed: args.seed, basis_sign_fault: args.inject_basis_fault };
    let outcomes = if args.only.is_empty() {
        run_all(&opts)
    } else {
        if let Some(bad) = args.only.iter().find(|n| !CHECKS.contains(&n.as_str())) {
            return Err(usage(format!("unknown check {bad:?}; available: {}", CHECKS.join(", "))));
        }
        args.only.iter().map(|n| run_check(n, &opts)).collect::<softlogic::Result<Vec<_>>>()?
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    Ok(if failed == 0 { Status::Ok } else { Status::Failed })
}
