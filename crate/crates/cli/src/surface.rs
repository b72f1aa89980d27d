use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use softlogic::nary::{ail, nary_forward, nary_forward_exact};
use softlogic::table::{catalog, catalog_entry, table_to_params};
use softlogic::{AilKind, BeliefTable};

use crate::config::{self, set};
use crate::{usage, Status};

#[derive(clap::Args)]
pub struct Args {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog operation name, or one of and, or, xnor.
    #[arg(long)]
    op: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// The grid spans `[-range, range]` on both axes.
    #[arg(long)]
    range: Option<f64>,
    /// Multiplier applied to the ±1 table before evaluation.
    #[arg(long)]
    scale: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub op: String,
    pub grid: usize,
    pub range: f64,
    pub scale: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { op: "and".into(), grid: 41, range: 10.0, scale: 30.0 }
    }
}

fn table_for(op: &str, scale: f64) -> Result<(BeliefTable, Option<AilKind>)> {
    let kind = op.parse::<AilKind>().ok();
    if let Some(entry) = catalog_entry(op) {
        return Ok((entry.belief_table(scale), kind));
    }
    if let Some(kind) = kind {
        let row: Vec<f64> = kind.truth_table().iter().map(|v| v * scale).collect();
        return Ok((BeliefTable::from_rows(&[row])?, Some(kind)));
    }
    let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
    Err(usage(format!("unknown operation {op:?}; available: {}, xnor", names.join(", "))))
}

pub fn run(args: Args) -> Result<Status> {
    let mut c: SurfaceConfig = config::load(args.config.as_deref())?;
    set(&mut c.op, args.op);
    set(&mut c.grid, args.grid);
    set(&mut c.range, args.range);
    set(&mut c.scale, args.scale);
    if c.grid < 2 {
        return Err(usage("--grid needs at least 2 points"));
    }
    if !(c.range > 0.0 && c.range.is_finite()) {
        return Err(usage("--range must be positive"));
    }
    let (table, kind) = table_for(&c.op, c.scale)?;
    let theta = table_to_params(&table)?;
    let step = 2.0 * c.range / (c.grid - 1) as f64;
    let axis: Vec<f64> = (0..c.grid).map(|i| -c.range + step * i as f64).collect();
    let mut csv = String::from("y1,y2,z_exact,z_lsem,z_ail\n");
    for &y1 in &axis {
        for &y2 in &axis {
            let y = [y1, y2];
            let exact = nary_forward_exact(&y, &table)?[0];
            let lsem = nary_forward(&y, &theta)?.0[0];
            let _ = write!(csv, "{y1},{y2},{exact},{lsem},");
            if let Some(k) = kind {
                let _ = write!(csv, "{}", ail(k, y1, y2));
            }
            csv.push('\n');
        }
    }
    match &args.out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(Status::Ok)
}
