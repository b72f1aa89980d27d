//! Random truth-function ground truths, logit-encoded datasets, architecture
//! sizing, and the count of quaternary functions reachable by composing three
//! binary operations.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_error, Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::DATA_LOGIT;

/// Largest ground-truth arity; tables hold `2^γ` entries.
pub const MAX_GAMMA: usize = 16;

/// One output of a ground truth: a truth table over a subset of the inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFunction {
    /// Input indices (0-based); `antecedents[i]` drives bit `i` of the table index.
    pub antecedents: Vec<usize>,
    /// `2^γ` entries in `bit1-lsb` order.
    pub table: Vec<bool>,
}

impl OutputFunction {
    pub fn table_index(&self, inputs: &[bool]) -> usize {
        self.antecedents
            .iter()
            .enumerate()
            .filter(|(_, &src)| inputs[src])
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        self.table[self.table_index(inputs)]
    }
}

/// A vector of random γ-ary truth functions over shared Boolean inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub gamma: usize,
    pub outputs: Vec<OutputFunction>,
}

impl GroundTruth {
    /// Assemble a ground truth from explicit functions, validating every subset and table.
    pub fn from_outputs(n_inputs: usize, gamma: usize, outputs: Vec<OutputFunction>) -> Result<Self> {
        check_gamma(n_inputs, gamma)?;
        for (k, f) in outputs.iter().enumerate() {
            if f.antecedents.len() != gamma {
                return Err(invalid(format!("output {k} has {} antecedents, expected {gamma}", f.antecedents.len())));
            }
            let distinct: HashSet<_> = f.antecedents.iter().collect();
            if distinct.len() != gamma || f.antecedents.iter().any(|&a| a >= n_inputs) {
                return Err(invalid(format!("output {k} antecedents must be {gamma} distinct inputs below {n_inputs}")));
            }
            if f.table.len() != 1 << gamma {
                return Err(invalid(format!("output {k} table has {} entries, expected {}", f.table.len(), 1 << gamma)));
            }
        }
        Ok(Self { n_inputs, n_outputs: outputs.len(), gamma, outputs })
    }

    pub fn apply(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        if inputs.len() != self.n_inputs {
            return Err(invalid(format!("expected {} inputs, got {}", self.n_inputs, inputs.len())));
        }
        Ok(self.outputs.iter().map(|f| f.eval(inputs)).collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| io_error(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let raw: GroundTruth = serde_json::from_str(&text)?;
        Self::from_outputs(raw.n_inputs, raw.gamma, raw.outputs)
    }
}

fn check_gamma(n_inputs: usize, gamma: usize) -> Result<()> {
    if gamma == 0 || gamma > n_inputs {
        return Err(invalid(format!("ground-truth arity {gamma} must lie in 1..={n_inputs}")));
    }
    if gamma > MAX_GAMMA {
        return Err(invalid(format!("ground-truth arity {gamma} exceeds {MAX_GAMMA}")));
    }
    Ok(())
}

/// Draw `n_outputs` functions, each on a uniform random subset of `gamma` distinct
/// inputs with a uniform random truth table.
pub fn generate_ground_truth(n_inputs: usize, n_outputs: usize, gamma: usize, seed: u64) -> Result<GroundTruth> {
    check_gamma(n_inputs, gamma)?;
    let mut rng = stream_rng(seed, Stream::Tables);
    let outputs = (0..n_outputs)
        .map(|_| {
            let antecedents = sample(&mut rng, n_inputs, gamma).into_vec();
            let table = (0..1usize << gamma).map(|_| rng.gen::<bool>()).collect();
            OutputFunction { antecedents, table }
        })
        .collect();
    GroundTruth::from_outputs(n_inputs, gamma, outputs)
}

#[inline]
pub fn encode(b: bool) -> f64 {
    if b {
        DATA_LOGIT
    } else {
        -DATA_LOGIT
    }
}

/// Logit-encoded samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub n_in: usize,
    pub n_out: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.inputs.len().checked_div(self.n_in).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input(&self, r: usize) -> &[f64] {
        &self.inputs[r * self.n_in..(r + 1) * self.n_in]
    }

    pub fn target(&self, r: usize) -> &[f64] {
        &self.targets[r * self.n_out..(r + 1) * self.n_out]
    }

    fn header(&self) -> String {
        format!("#softlogic-dataset v1, n_in={}, n_out={}", self.n_in, self.n_out)
    }

    /// Header line followed by one CSV row of `n_in + n_out` logits per sample.
    pub fn to_csv(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        for r in 0..self.len() {
            let row: Vec<String> = self
                .input(r)
                .iter()
                .chain(self.target(r))
                .map(|v| format!("{v}"))
                .collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty dataset file".into()))?;
        let (n_in, n_out) = parse_header(header)?;
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let values: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if values.len() != n_in + n_out {
                return Err(Error::Parse(format!(
                    "line {}: expected {} values, got {}",
                    lineno + 2,
                    n_in + n_out,
                    values.len()
                )));
            }
            inputs.extend_from_slice(&values[..n_in]);
            targets.extend_from_slice(&values[n_in..]);
        }
        Ok(Self { n_in, n_out, inputs, targets })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| io_error(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_csv(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("bad dataset header {header:?}"));
    let rest = header.strip_prefix("#softlogic-dataset v1").ok_or_else(bad)?;
    let mut n_in = None;
    let mut n_out = None;
    for field in rest.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field.split_once('=').ok_or_else(bad)?;
        let value: usize = value.parse().map_err(|_| bad())?;
        match key {
            "n_in" => n_in = Some(value),
            "n_out" => n_out = Some(value),
            _ => return Err(bad()),
        }
    }
    Ok((n_in.ok_or_else(bad)?, n_out.ok_or_else(bad)?))
}

/// Train, validation, and test samples drawn from one ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Split,
    pub val: Split,
    pub test: Split,
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const SPLIT_FILES: [&str; 3] = ["train.csv", "val.csv", "test.csv"];

impl Dataset {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for (split, name) in [&self.train, &self.val, &self.test].into_iter().zip(SPLIT_FILES) {
            split.save(&dir.join(name))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let [train, val, test] = SPLIT_FILES.map(|name| Split::load(&dir.join(name)));
        Ok(Self { train: train?, val: val?, test: test? })
    }
}

fn draw_split(gt: &GroundTruth, rows: usize, rng: &mut impl Rng) -> Split {
    let mut inputs = Vec::with_capacity(rows * gt.n_inputs);
    let mut targets = Vec::with_capacity(rows * gt.n_outputs);
    let mut bits = vec![false; gt.n_inputs];
    for _ in 0..rows {
        for b in bits.iter_mut() {
            *b = rng.gen::<bool>();
        }
        inputs.extend(bits.iter().map(|&b| encode(b)));
        targets.extend(gt.outputs.iter().map(|f| encode(f.eval(&bits))));
    }
    Split { n_in: gt.n_inputs, n_out: gt.n_outputs, inputs, targets }
}

/// Draw independent fair-coin inputs and label them with the ground truth.
pub fn synthesize(gt: &GroundTruth, n_train: usize, n_val: usize, n_test: usize, seed: u64) -> Result<Dataset> {
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(invalid("dataset splits must be non-empty"));
    }
    let mut rng = stream_rng(seed, Stream::Data);
    Ok(Dataset {
        train: draw_split(gt, n_train, &mut rng),
        val: draw_split(gt, n_val, &mut rng),
        test: draw_split(gt, n_test, &mut rng),
    })
}

/// Layer widths for an architecture whose final layer can see `gamma` inputs
/// through arity-`n` activations: `L = ⌈log_n γ⌉` layers, layer `ℓ` with
/// `base_width · ⌈γ / n^ℓ⌉` channels.
pub fn size_architecture(gamma: usize, n: usize, base_width: usize) -> Result<Vec<usize>> {
    if gamma == 0 || n == 0 {
        return Err(invalid("ground-truth arity and activation arity must be positive"));
    }
    if n == 1 {
        if gamma > 1 {
            return Err(invalid("unary activations cannot combine several antecedents"));
        }
        return Ok(vec![base_width]);
    }
    let mut widths = Vec::new();
    let mut reach = 1usize;
    loop {
        reach = reach.saturating_mul(n);
        widths.push(base_width * gamma.div_ceil(reach));
        if reach >= gamma {
            break;
        }
    }
    Ok(widths)
}

/// Truth table of binary operation `op` (4-bit, `bit1-lsb`) applied to inputs
/// `a` and `b` of a quaternary function, as a 16-bit table.
pub fn lift_binary(op: u8, a: usize, b: usize) -> u16 {
    (0..16u16).fold(0, |acc, v| {
        let idx = ((v >> a) & 1) | (((v >> b) & 1) << 1);
        acc | (u16::from((op >> idx) & 1) << v)
    })
}

fn compose(op: u8, left: u16, right: u16) -> u16 {
    (0..16u16).fold(0, |acc, v| {
        let idx = ((left >> v) & 1) | (((right >> v) & 1) << 1);
        acc | (u16::from((op >> idx) & 1) << v)
    })
}

/// The three ways of splitting four inputs into two pairs.
pub const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// Number of (pairing, op1, op2, op3) candidates enumerated.
pub const COMPOSITION_CANDIDATES: usize = 3 * 16 * 16 * 16;

/// Distinct quaternary truth tables of the form `(x_a ∘1 x_b) ∘3 (x_c ∘2 x_d)`.
pub fn composition_tables() -> HashSet<u16> {
    let mut seen = HashSet::new();
    for [(a, b), (c, d)] in PAIRINGS {
        let lefts: Vec<u16> = (0..16).map(|op| lift_binary(op, a, b)).collect();
        let rights: Vec<u16> = (0..16).map(|op| lift_binary(op, c, d)).collect();
        for &l in &lefts {
            for &r in &rights {
                for op3 in 0..16 {
                    seen.insert(compose(op3, l, r));
                }
            }
        }
    }
    seen
}

pub fn count_binary_compositions() -> usize {
    composition_tables().len()
}
