use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use softlogic::network::Checkpoint;
use softlogic::table::{irrelevant_antecedents, nonzero_count, params_to_table};

use crate::Status;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Parameters at or below this magnitude count as zero.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    tolerance: f64,
    layers: Vec<LayerReport>,
    violations: usize,
}

#[derive(Serialize)]
struct LayerReport {
    layer: usize,
    activation: String,
    in_width: usize,
    out_width: usize,
    channels: Vec<ChannelReport>,
}

#[derive(Serialize)]
struct ChannelReport {
    channel: usize,
    /// 1-based antecedent indices.
    irrelevant: Vec<usize>,
    effective_arity: usize,
    nnz: usize,
    nnz_bound: usize,
    theta: Vec<f64>,
    table: Vec<f64>,
}

pub fn run(args: Args) -> Result<Status> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let (spec, params) = ck.into_parts()?;
    let mut violations = 0;
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (i, (l, p)) in spec.layers.iter().zip(&params.layers).enumerate() {
        let mut channels = Vec::new();
        if let Some(theta) = &p.theta {
            let table = params_to_table(theta)?;
            for (k, (row, trow)) in theta.rows().zip(table.rows()).enumerate() {
                let irrelevant: Vec<usize> = irrelevant_antecedents(row, args.tol)?.into_iter().collect();
                let effective_arity = theta.arity() - irrelevant.len();
                let nnz = nonzero_count(row, args.tol);
                let nnz_bound = 1 << effective_arity;
                if nnz > nnz_bound {
                    violations += 1;
                }
                channels.push(ChannelReport {
                    channel: k,
                    irrelevant,
                    effective_arity,
                    nnz,
                    nnz_bound,
                    theta: row.to_vec(),
                    table: trow.to_vec(),
                });
            }
        }
        layers.push(LayerReport {
            layer: i + 1,
            activation: l.activation.to_string(),
            in_width: l.in_width,
            out_width: l.out_width,
            channels,
        });
    }
    let report = Report { tolerance: args.tol, layers, violations };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if violations > 0 {
        eprintln!("{violations} channel(s) have more nonzero parameters than 2^(effective arity)");
        return Ok(Status::Failed);
    }
    Ok(Status::Ok)
}
