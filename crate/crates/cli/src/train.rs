use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use softlogic::logicgen::{size_architecture, GROUND_TRUTH_FILE};
use softlogic::network::{train, Checkpoint};
use softlogic::{Activation, Dataset, GroundTruth, L1Mode, NetworkSpec, TrainConfig};

use crate::config::{self, set};
use crate::{usage, Status};

#[derive(clap::Args)]
pub struct Args {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory written by `gen`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// One of nary, relu, maxmin, maxail.
    #[arg(long)]
    activation: Option<String>,
    /// Arity of nary activations.
    #[arg(long)]
    arity: Option<usize>,
    /// Output width of each layer, comma separated. Defaults to a size fitted to the ground truth.
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// `off`, `adaptive`, or a fixed weight.
    #[arg(long)]
    l1: Option<String>,
    /// Seed of the first trial; trial `t` uses `seed + t - 1`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRunConfig {
    pub data: PathBuf,
    pub activation: String,
    pub arity: usize,
    pub widths: Option<Vec<usize>>,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    pub optimizer: TrainConfig,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::from("data"),
            activation: "nary".into(),
            arity: 2,
            widths: None,
            seed: 1,
            trials: 12,
            out: PathBuf::from("runs"),
            optimizer: TrainConfig::default(),
        }
    }
}

fn parse_l1(s: &str) -> Result<L1Mode> {
    match s {
        "off" => Ok(L1Mode::Off),
        "adaptive" => Ok(L1Mode::default()),
        w => match w.parse::<f64>() {
            Ok(weight) => Ok(L1Mode::Fixed { weight }),
            Err(_) => Err(usage(format!("--l1 expects off, adaptive, or a number, got {w:?}"))),
        },
    }
}

fn resolve(args: Args) -> Result<TrainRunConfig> {
    let mut c: TrainRunConfig = config::load(args.config.as_deref())?;
    set(&mut c.data, args.data);
    set(&mut c.activation, args.activation);
    set(&mut c.arity, args.arity);
    if args.widths.is_some() {
        c.widths = args.widths;
    }
    set(&mut c.seed, args.seed);
    set(&mut c.trials, args.trials);
    set(&mut c.out, args.out);
    let o = &mut c.optimizer;
    set(&mut o.epochs, args.epochs);
    set(&mut o.batch_size, args.batch_size);
    set(&mut o.learning_rate, args.lr);
    set(&mut o.l1_mode, args.l1.as_deref().map(parse_l1).transpose()?);
    o.seed = c.seed;
    o.validate()?;
    if c.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    Ok(c)
}

struct TrialResult {
    trial: usize,
    seed: u64,
    best_epoch: usize,
    val_loss: f64,
    test_accuracy: f64,
    metrics: String,
}

pub fn run(args: Args) -> Result<Status> {
    let mut c = resolve(args)?;
    let activation = Activation::parse(&c.activation, c.arity)?;
    let data = Dataset::load(&c.data)?;
    let widths = match &c.widths {
        Some(w) => w.clone(),
        None => {
            let gt = GroundTruth::load(&c.data.join(GROUND_TRUTH_FILE))?;
            size_architecture(gt.gamma, activation.effective_arity(), data.train.n_out)?
        }
    };
    c.widths = Some(widths.clone());
    let spec = NetworkSpec::sized(data.train.n_in, &widths, activation)?;
    if spec.out_width() != data.train.n_out {
        return Err(usage(format!(
            "last layer width {} does not match the {} dataset outputs",
            spec.out_width(),
            data.train.n_out
        )));
    }
    fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    config::save(&c, &c.out)?;

    let results = (1..=c.trials)
        .into_par_iter()
        .map(|trial| run_trial(&c, &spec, &data, trial))
        .collect::<Result<Vec<_>>>()?;

    write_summary(&c.out, &results)?;
    for r in &results {
        println!(
            "trial {:>2} seed {:>3} best epoch {:>2} val loss {:.5} test accuracy {:.4}",
            r.trial, r.seed, r.best_epoch, r.val_loss, r.test_accuracy
        );
    }
    let mut acc: Vec<f64> = results.iter().map(|r| r.test_accuracy).collect();
    acc.sort_by(f64::total_cmp);
    println!("median test accuracy {:.4} over {} trials", median(&acc), acc.len());
    Ok(Status::Ok)
}

fn run_trial(c: &TrainRunConfig, spec: &NetworkSpec, data: &Dataset, trial: usize) -> Result<TrialResult> {
    let seed = c.seed + trial as u64 - 1;
    let config = TrainConfig { seed, ..c.optimizer };
    let report = train(spec, data, &config)?;
    let dir = c.out.join(format!("trial-{trial:02}"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let metrics = report.metrics_csv();
    let path = dir.join("metrics.csv");
    fs::write(&path, &metrics).with_context(|| format!("writing {}", path.display()))?;
    Checkpoint::new(spec, &report.best_params)?.save(&dir.join("checkpoint.json"))?;
    let best = report.best();
    Ok(TrialResult {
        trial,
        seed,
        best_epoch: report.best_epoch,
        val_loss: best.val.loss,
        test_accuracy: best.test.accuracy,
        metrics,
    })
}

fn write_summary(dir: &Path, results: &[TrialResult]) -> Result<()> {
    let mut metrics = String::from("trial,epoch,split,loss,accuracy\n");
    let mut summary = String::from("trial,seed,best_epoch,val_loss,test_accuracy\n");
    for r in results {
        for line in r.metrics.lines().skip(1) {
            let _ = writeln!(metrics, "{},{line}", r.trial);
        }
        let _ = writeln!(summary, "{},{},{},{},{}", r.trial, r.seed, r.best_epoch, r.val_loss, r.test_accuracy);
    }
    for (name, text) in [("metrics.csv", metrics), ("summary.csv", summary)] {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
