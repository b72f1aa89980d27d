use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use softlogic::logicgen::{generate_ground_truth, synthesize, GROUND_TRUTH_FILE};

use crate::config::{self, set};
use crate::{usage, Status};

#[derive(clap::Args)]
pub struct Args {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arity of every ground-truth function.
    #[arg(long)]
    gamma: Option<usize>,
    #[arg(long)]
    inputs: Option<usize>,
    #[arg(long)]
    outputs: Option<usize>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    val: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub gamma: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            gamma: 2,
            inputs: 32,
            outputs: 32,
            train: 2000,
            val: 500,
            test: 500,
            seed: 1,
            out: PathBuf::from("data"),
        }
    }
}

fn resolve(args: Args) -> Result<GenConfig> {
    let mut c: GenConfig = config::load(args.config.as_deref())?;
    set(&mut c.gamma, args.gamma);
    set(&mut c.inputs, args.inputs);
    set(&mut c.outputs, args.outputs);
    set(&mut c.train, args.train);
    set(&mut c.val, args.val);
    set(&mut c.test, args.test);
    set(&mut c.seed, args.seed);
    set(&mut c.out, args.out);
    if c.gamma == 0 || c.gamma > c.inputs {
        return Err(usage(format!("--gamma {} must lie in 1..={} (the input count)", c.gamma, c.inputs)));
    }
    if c.outputs == 0 {
        return Err(usage("--outputs must be positive"));
    }
    Ok(c)
}

pub fn run(args: Args) -> Result<Status> {
    let c = resolve(args)?;
    let gt = generate_ground_truth(c.inputs, c.outputs, c.gamma, c.seed)?;
    let data = synthesize(&gt, c.train, c.val, c.test, c.seed)?;
    write(&c.out, &c, &gt, &data)?;
    println!(
        "wrote {} ({} inputs, {} outputs, gamma {}, {}/{}/{} samples)",
        c.out.display(),
        c.inputs,
        c.outputs,
        c.gamma,
        c.train,
        c.val,
        c.test
    );
    Ok(Status::Ok)
}

fn write(
    dir: &Path,
    c: &GenConfig,
    gt: &softlogic::GroundTruth,
    data: &softlogic::Dataset,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    gt.save(&dir.join(GROUND_TRUTH_FILE))?;
    data.save(dir)?;
    config::save(c, dir)
}
