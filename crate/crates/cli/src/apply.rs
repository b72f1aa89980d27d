use std::path::PathBuf;

use anyhow::Result;
use softlogic::logicgen::GROUND_TRUTH_FILE;
use softlogic::GroundTruth;

use crate::{usage, Status};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory or ground-truth JSON file.
    #[arg(long)]
    data: PathBuf,
    /// Input bits, first character is input 1 (e.g. `0110`).
    #[arg(long)]
    bits: String,
}

pub fn run(args: Args) -> Result<Status> {
    let path = if args.data.is_dir() { args.data.join(GROUND_TRUTH_FILE) } else { args.data };
    let gt = GroundTruth::load(&path)?;
    let inputs = args
        .bits
        .chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(usage(format!("--bits may only contain 0 and 1, found {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let out = gt.apply(&inputs)?;
    println!("{}", out.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
    Ok(Status::Ok)
}
