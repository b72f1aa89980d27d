//! Dense layers (linear map followed by an activation) and their composition.
//!
//! A layer maps `in_width` logits to `out_width` logits. Its linear part is an
//! unbiased matrix `M`; the activation decides how many rows `M` needs:
//!
//! | activation | rows of `M`       | extra parameters   |
//! |------------|-------------------|--------------------|
//! | `nary(n)`  | `n · out_width`   | `Θ`, `out × 2^n`   |
//! | `relu`     | `out_width`       |                    |
//! | `maxmin`   | `out_width`       |                    |
//! | `maxail`   | `2 · out_width`   |                    |

mod adam;
mod loss;
mod train;

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_error, Error, Result};
use crate::nary::{backward_channel, forward_channel, levels_len};
use crate::rng::{stream_rng, Stream};
use crate::table::{params_row_to_table, table_row_grad_to_params, ParamTable};
use crate::MAX_ARITY;

pub use adam::{adam_step, adaptive_l1_weight, adaptive_l1_weight_with, AdamConfig, AdamState};
pub use loss::{bce_grad, bce_logits, loss_bce_logits, sign_accuracy};
pub use train::{
    evaluate, train, train_with_params, EpochMetrics, L1Mode, SplitMetrics, TrainConfig,
    TrainReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Activation {
    Nary { arity: usize },
    Relu,
    Maxmin,
    Maxail,
}

impl Activation {
    /// Parse a CLI-style activation name; `arity` only applies to `nary`.
    pub fn parse(name: &str, arity: usize) -> Result<Self> {
        match name {
            "nary" => {
                if !(1..=MAX_ARITY).contains(&arity) {
                    return Err(invalid(format!("arity must lie in 1..={MAX_ARITY}, got {arity}")));
                }
                Ok(Activation::Nary { arity })
            }
            "relu" => Ok(Activation::Relu),
            "maxmin" => Ok(Activation::Maxmin),
            "maxail" => Ok(Activation::Maxail),
            other => Err(invalid(format!("unknown activation {other:?}"))),
        }
    }

    /// Number of inputs whose combination one output channel can express.
    pub fn effective_arity(self) -> usize {
        match self {
            Activation::Nary { arity } => arity,
            _ => 2,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Nary { arity } => write!(f, "{arity}-ary"),
            Activation::Relu => f.write_str("relu"),
            Activation::Maxmin => f.write_str("maxmin"),
            Activation::Maxail => f.write_str("maxail"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_width: usize,
    pub out_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_width: usize, out_width: usize, activation: Activation) -> Result<Self> {
        if in_width == 0 || out_width == 0 {
            return Err(invalid("layer widths must be positive"));
        }
        match activation {
            Activation::Nary { arity } if !(1..=MAX_ARITY).contains(&arity) => {
                return Err(invalid(format!("arity must lie in 1..={MAX_ARITY}, got {arity}")))
            }
            Activation::Maxmin if !out_width.is_multiple_of(2) => {
                return Err(invalid("maxmin layers need an even output width"))
            }
            _ => {}
        }
        Ok(Self { in_width, out_width, activation })
    }

    /// Rows of the linear map.
    pub fn linear_width(&self) -> usize {
        match self.activation {
            Activation::Nary { arity } => arity * self.out_width,
            Activation::Maxail => 2 * self.out_width,
            Activation::Relu | Activation::Maxmin => self.out_width,
        }
    }

    pub fn param_count(&self) -> usize {
        let table = match self.activation {
            Activation::Nary { arity } => self.out_width << arity,
            _ => 0,
        };
        self.linear_width() * self.in_width + table
    }
}

/// A stack of layers whose widths chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for w in layers.windows(2) {
            if w[0].out_width != w[1].in_width {
                return Err(invalid(format!(
                    "layer widths do not chain: {} -> {}",
                    w[0].out_width, w[1].in_width
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Layers of the given output widths, all with the same activation.
    pub fn sized(in_width: usize, widths: &[usize], activation: Activation) -> Result<Self> {
        let mut prev = in_width;
        let layers = widths
            .iter()
            .map(|&w| {
                let l = LayerSpec::new(prev, w, activation);
                prev = w;
                l
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn in_width(&self) -> usize {
        self.layers[0].in_width
    }

    pub fn out_width(&self) -> usize {
        self.layers[self.layers.len() - 1].out_width
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::param_count).sum()
    }
}

/// Trainable state of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `linear_width × in_width`, row-major.
    pub weights: Vec<f64>,
    pub theta: Option<ParamTable>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
}

/// Which kind of tensor a parameter group holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Weights,
    Theta,
}

impl NetworkParams {
    /// Linear weights uniform in `±sqrt(3 / fan_in)`, activation parameters uniform in `±0.1`.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, Stream::Weights);
        let layers = spec
            .layers
            .iter()
            .map(|l| {
                let bound = (3.0 / l.in_width as f64).sqrt();
                let weights = (0..l.linear_width() * l.in_width)
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect();
                let theta = match l.activation {
                    Activation::Nary { arity } => {
                        let entries = (0..l.out_width << arity)
                            .map(|_| rng.gen_range(-0.1..=0.1))
                            .collect();
                        Some(ParamTable::new(arity, l.out_width, entries)?)
                    }
                    _ => None,
                };
                Ok(LayerParams { weights, theta })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    /// All-zero parameters.
    pub fn zeros(spec: &NetworkSpec) -> Result<Self> {
        let layers = spec
            .layers
            .iter()
            .map(|l| {
                let theta = match l.activation {
                    Activation::Nary { arity } => Some(ParamTable::zeros(arity, l.out_width)?),
                    _ => None,
                };
                Ok(LayerParams { weights: vec![0.0; l.linear_width() * l.in_width], theta })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.layers.len() {
            return Err(invalid(format!(
                "{} parameter layers for {} spec layers",
                self.layers.len(),
                spec.layers.len()
            )));
        }
        for (i, (p, l)) in self.layers.iter().zip(&spec.layers).enumerate() {
            if p.weights.len() != l.linear_width() * l.in_width {
                return Err(invalid(format!("layer {i}: weight matrix has wrong size")));
            }
            match (l.activation, &p.theta) {
                (Activation::Nary { arity }, Some(t))
                    if t.arity() == arity && t.channels() == l.out_width => {}
                (Activation::Nary { .. }, _) => {
                    return Err(invalid(format!("layer {i}: activation parameters do not match")))
                }
                (_, Some(_)) => {
                    return Err(invalid(format!("layer {i}: unexpected activation parameters")))
                }
                (_, None) => {}
            }
        }
        Ok(())
    }

    /// Flat views of every parameter group, in layer order (weights, then `Θ`).
    pub fn groups_mut(&mut self) -> Vec<(GroupKind, &mut [f64])> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push((GroupKind::Weights, l.weights.as_mut_slice()));
            if let Some(t) = &mut l.theta {
                out.push((GroupKind::Theta, t.entries_mut()));
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.theta.as_ref().map_or(0, |t| t.entries().len()))
            .sum()
    }
}

/// Gradients shaped like [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub theta: Option<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    theta: l.theta.as_ref().map(|t| vec![0.0; t.entries().len()]),
                })
                .collect(),
        }
    }

    /// Flat views in the same order as [`NetworkParams::groups_mut`].
    pub fn groups(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(l.weights.as_slice());
            if let Some(t) = &l.theta {
                out.push(t.as_slice());
            }
        }
        out
    }
}

/// Intermediate values of one layer evaluation.
#[derive(Debug, Clone, Default)]
pub struct LayerCache {
    pub input: Vec<f64>,
    /// Linear output `M x`.
    pub pre: Vec<f64>,
    /// Partial belief tables of every channel (n-ary layers only).
    pub levels: Vec<f64>,
    pub output: Vec<f64>,
}

/// Belief tables `A^(0)` of every n-ary layer, computed once per parameter update.
fn belief_tables(params: &NetworkParams) -> Vec<Option<Vec<f64>>> {
    params
        .layers
        .iter()
        .map(|l| {
            l.theta.as_ref().map(|t| {
                let mut a = vec![0.0; t.entries().len()];
                for (src, dst) in t.rows().zip(a.chunks_exact_mut(t.width())) {
                    params_row_to_table(src, dst);
                }
                a
            })
        })
        .collect()
}

fn layer_forward_with(
    x: &[f64],
    spec: &LayerSpec,
    params: &LayerParams,
    table: Option<&[f64]>,
) -> LayerCache {
    let rows = spec.linear_width();
    let pre: Vec<f64> = params
        .weights
        .chunks_exact(spec.in_width)
        .take(rows)
        .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect();
    let mut levels = Vec::new();
    let output = match spec.activation {
        Activation::Nary { arity } => {
            let stride = levels_len(arity);
            let width = 1 << arity;
            let table = table.expect("n-ary layer has a belief table");
            levels = vec![0.0; spec.out_width * stride];
            (0..spec.out_width)
                .map(|k| {
                    forward_channel(
                        &pre[k * arity..(k + 1) * arity],
                        &table[k * width..(k + 1) * width],
                        &mut levels[k * stride..(k + 1) * stride],
                    )
                })
                .collect()
        }
        Activation::Relu => pre.iter().map(|&v| v.max(0.0)).collect(),
        Activation::Maxmin => pre
            .chunks_exact(2)
            .flat_map(|p| [p[0].max(p[1]), p[0].min(p[1])])
            .collect(),
        Activation::Maxail => pre
            .chunks_exact(2)
            .map(|p| p[0].max(p[1]).max(p[0] + p[1]))
            .collect(),
    };
    LayerCache { input: x.to_vec(), pre, levels, output }
}

/// Evaluate one layer: `y = M x`, reshaped to `out_width × n` rows for n-ary
/// activations, then the activation.
pub fn layer_forward(x: &[f64], spec: &LayerSpec, params: &LayerParams) -> Result<LayerCache> {
    if x.len() != spec.in_width {
        return Err(invalid(format!("layer expects {} inputs, got {}", spec.in_width, x.len())));
    }
    let net = NetworkSpec::new(vec![*spec])?;
    let p = NetworkParams { layers: vec![params.clone()] };
    p.check(&net)?;
    let tables = belief_tables(&p);
    Ok(layer_forward_with(x, spec, params, tables[0].as_deref()))
}

/// Backpropagate `dz` through one layer, accumulating weight gradients and
/// belief-table gradients (in table space). Returns `∂J/∂x`.
fn layer_backward(
    spec: &LayerSpec,
    params: &LayerParams,
    cache: &LayerCache,
    dz: &[f64],
    grad: &mut LayerGrad,
    table_grad: Option<&mut [f64]>,
    scratch: &mut Vec<f64>,
) -> Vec<f64> {
    let rows = spec.linear_width();
    let mut dy = vec![0.0; rows];
    match spec.activation {
        Activation::Nary { arity } => {
            let stride = levels_len(arity);
            let width = 1 << arity;
            scratch.resize(2 * width, 0.0);
            let table_grad = table_grad.expect("n-ary layer has a table gradient");
            for (k, &g) in dz.iter().enumerate() {
                backward_channel(
                    &cache.pre[k * arity..(k + 1) * arity],
                    &cache.levels[k * stride..(k + 1) * stride],
                    g,
                    &mut dy[k * arity..(k + 1) * arity],
                    &mut table_grad[k * width..(k + 1) * width],
                    scratch,
                );
            }
        }
        Activation::Relu => {
            for ((d, &g), &y) in dy.iter_mut().zip(dz).zip(&cache.pre) {
                *d = if y > 0.0 { g } else { 0.0 };
            }
        }
        Activation::Maxmin => {
            for (p, (pair, g)) in cache.pre.chunks_exact(2).zip(dz.chunks_exact(2)).enumerate() {
                let (hi, lo) = if pair[0] >= pair[1] { (0, 1) } else { (1, 0) };
                dy[2 * p + hi] += g[0];
                dy[2 * p + lo] += g[1];
            }
        }
        Activation::Maxail => {
            for (p, (pair, &g)) in cache.pre.chunks_exact(2).zip(dz).enumerate() {
                let (a, b) = (pair[0], pair[1]);
                let s = a + b;
                if a >= b && a >= s {
                    dy[2 * p] += g;
                } else if b >= s {
                    dy[2 * p + 1] += g;
                } else {
                    dy[2 * p] += g;
                    dy[2 * p + 1] += g;
                }
            }
        }
    }
    let mut dx = vec![0.0; spec.in_width];
    for (r, &d) in dy.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let w = &params.weights[r * spec.in_width..(r + 1) * spec.in_width];
        let gw = &mut grad.weights[r * spec.in_width..(r + 1) * spec.in_width];
        for ((gwi, &xi), (dxi, &wi)) in gw.iter_mut().zip(&cache.input).zip(dx.iter_mut().zip(w)) {
            *gwi += d * xi;
            *dxi += d * wi;
        }
    }
    dx
}

/// Shared evaluation context: spec, parameters, and their belief tables.
pub struct Evaluator<'a> {
    spec: &'a NetworkSpec,
    params: &'a NetworkParams,
    tables: Vec<Option<Vec<f64>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a NetworkSpec, params: &'a NetworkParams) -> Result<Self> {
        params.check(spec)?;
        Ok(Self { spec, params, tables: belief_tables(params) })
    }

    pub fn trace(&self, x: &[f64]) -> Result<Vec<LayerCache>> {
        if x.len() != self.spec.in_width() {
            return Err(invalid(format!(
                "network expects {} inputs, got {}",
                self.spec.in_width(),
                x.len()
            )));
        }
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.spec.layers.len());
        for (i, (l, p)) in self.spec.layers.iter().zip(&self.params.layers).enumerate() {
            let input = caches.last().map_or(x, |c| c.output.as_slice());
            let cache = layer_forward_with(input, l, p, self.tables[i].as_deref());
            caches.push(cache);
        }
        Ok(caches)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut caches = self.trace(x)?;
        Ok(caches.pop().map(|c| c.output).unwrap_or_default())
    }

    /// Accumulate gradients of `Σ dz · z` for one traced sample. Table gradients
    /// stay in belief-table space until [`Self::finish`].
    pub fn accumulate(
        &self,
        caches: &[LayerCache],
        dz: &[f64],
        grads: &mut Gradients,
        table_grads: &mut [Option<Vec<f64>>],
        scratch: &mut Vec<f64>,
    ) {
        let mut upstream = dz.to_vec();
        for i in (0..self.spec.layers.len()).rev() {
            upstream = layer_backward(
                &self.spec.layers[i],
                &self.params.layers[i],
                &caches[i],
                &upstream,
                &mut grads.layers[i],
                table_grads[i].as_deref_mut(),
                scratch,
            );
        }
    }

    pub fn table_grad_buffers(&self) -> Vec<Option<Vec<f64>>> {
        self.tables.iter().map(|t| t.as_ref().map(|a| vec![0.0; a.len()])).collect()
    }

    /// Map accumulated belief-table gradients onto `Θ` through `Bᵀ`.
    pub fn finish(&self, grads: &mut Gradients, table_grads: &[Option<Vec<f64>>]) {
        for ((g, tg), p) in grads.layers.iter_mut().zip(table_grads).zip(&self.params.layers) {
            if let (Some(gt), Some(tg), Some(theta)) = (&mut g.theta, tg, &p.theta) {
                let w = theta.width();
                for (src, dst) in tg.chunks_exact(w).zip(gt.chunks_exact_mut(w)) {
                    let mut tmp = vec![0.0; w];
                    table_row_grad_to_params(src, &mut tmp);
                    for (d, t) in dst.iter_mut().zip(tmp) {
                        *d += t;
                    }
                }
            }
        }
    }
}

/// Outputs for a row-major batch of inputs.
pub fn network_forward(spec: &NetworkSpec, params: &NetworkParams, inputs: &[f64]) -> Result<Vec<f64>> {
    let eval = Evaluator::new(spec, params)?;
    let n_in = spec.in_width();
    if !inputs.len().is_multiple_of(n_in) {
        return Err(invalid(format!("batch length {} is not a multiple of {n_in}", inputs.len())));
    }
    let mut out = Vec::with_capacity(inputs.len() / n_in * spec.out_width());
    for x in inputs.chunks_exact(n_in) {
        out.extend(eval.forward(x)?);
    }
    Ok(out)
}

/// Gradients of `Σ_samples Σ_outputs upstream · z` for an arbitrary output gradient.
pub fn network_backward_with_upstream(
    spec: &NetworkSpec,
    params: &NetworkParams,
    inputs: &[f64],
    upstream: &[f64],
) -> Result<Gradients> {
    let eval = Evaluator::new(spec, params)?;
    let (n_in, n_out) = (spec.in_width(), spec.out_width());
    if !inputs.len().is_multiple_of(n_in) || upstream.len() != inputs.len() / n_in * n_out {
        return Err(invalid("batch inputs and output gradients disagree in size"));
    }
    let mut grads = Gradients::zeros_like(params);
    let mut table_grads = eval.table_grad_buffers();
    let mut scratch = Vec::new();
    for (x, dz) in inputs.chunks_exact(n_in).zip(upstream.chunks_exact(n_out)) {
        let caches = eval.trace(x)?;
        eval.accumulate(&caches, dz, &mut grads, &mut table_grads, &mut scratch);
    }
    eval.finish(&mut grads, &table_grads);
    Ok(grads)
}

/// Batch outputs, mean cross-entropy loss, and its gradients.
pub struct BackwardResult {
    pub outputs: Vec<f64>,
    pub loss: f64,
    pub grads: Gradients,
}

/// Forward and backward pass of the mean logit cross-entropy over a batch.
pub fn network_backward(
    spec: &NetworkSpec,
    params: &NetworkParams,
    inputs: &[f64],
    targets: &[f64],
) -> Result<BackwardResult> {
    let eval = Evaluator::new(spec, params)?;
    let (n_in, n_out) = (spec.in_width(), spec.out_width());
    if !inputs.len().is_multiple_of(n_in) || targets.len() != inputs.len() / n_in * n_out || targets.is_empty() {
        return Err(invalid("batch inputs and targets disagree in size"));
    }
    let norm = 1.0 / targets.len() as f64;
    let mut grads = Gradients::zeros_like(params);
    let mut table_grads = eval.table_grad_buffers();
    let mut scratch = Vec::new();
    let mut outputs = Vec::with_capacity(targets.len());
    let mut loss = 0.0;
    let mut dz = vec![0.0; n_out];
    for (x, t) in inputs.chunks_exact(n_in).zip(targets.chunks_exact(n_out)) {
        let caches = eval.trace(x)?;
        let z = &caches[caches.len() - 1].output;
        for ((d, &zi), &ti) in dz.iter_mut().zip(z).zip(t) {
            loss += bce_logits(zi, ti);
            *d = bce_grad(zi, ti) * norm;
        }
        outputs.extend_from_slice(z);
        eval.accumulate(&caches, &dz, &mut grads, &mut table_grads, &mut scratch);
    }
    eval.finish(&mut grads, &table_grads);
    Ok(BackwardResult { outputs, loss: loss * norm, grads })
}

/// On-disk network: layer specs with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub layers: Vec<CheckpointLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub spec: LayerSpec,
    /// One row per linear output.
    pub weights: Vec<Vec<f64>>,
    pub theta: Option<ParamTable>,
}

impl Checkpoint {
    pub fn new(spec: &NetworkSpec, params: &NetworkParams) -> Result<Self> {
        params.check(spec)?;
        Ok(Self {
            layers: spec
                .layers
                .iter()
                .zip(&params.layers)
                .map(|(l, p)| CheckpointLayer {
                    spec: *l,
                    weights: p.weights.chunks_exact(l.in_width).map(<[f64]>::to_vec).collect(),
                    theta: p.theta.clone(),
                })
                .collect(),
        })
    }

    pub fn into_parts(self) -> Result<(NetworkSpec, NetworkParams)> {
        let spec = NetworkSpec::new(self.layers.iter().map(|l| l.spec).collect())?;
        let params = NetworkParams {
            layers: self
                .layers
                .into_iter()
                .map(|l| LayerParams { weights: l.weights.concat(), theta: l.theta })
                .collect(),
        };
        params.check(&spec)?;
        Ok((spec, params))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| io_error(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logit::unary_forward;
    use crate::logit::UnaryRow;
    use crate::nary::{ail, AilKind};
    use crate::table::catalog;

    #[test]
    fn parameter_counts_at_width_32() {
        let expected = [1088, 2176, 3328, 4608];
        for (n, &p) in (1..=4).zip(&expected) {
            let l = LayerSpec::new(32, 32, Activation::Nary { arity: n }).unwrap();
            assert_eq!(l.param_count(), p);
        }
    }

    #[test]
    fn unary_layer_with_identity_weights() {
        let rows: Vec<[f64; 2]> = vec![[-1.0, 2.0], [0.5, 0.5], [3.0, -4.0]];
        let spec = LayerSpec::new(3, 3, Activation::Nary { arity: 1 }).unwrap();
        let mut weights = vec![0.0; 9];
        for i in 0..3 {
            weights[i * 3 + i] = 1.0;
        }
        let table = crate::BeliefTable::from_rows(&rows).unwrap();
        let theta = crate::table::table_to_params(&table).unwrap();
        let params = LayerParams { weights, theta: Some(theta) };
        let x = [0.7, -2.0, 1.5];
        let cache = layer_forward(&x, &spec, &params).unwrap();
        for k in 0..3 {
            let expected = unary_forward(x[k], UnaryRow::new(rows[k][0], rows[k][1]));
            assert!((cache.output[k] - expected).abs() < 1e-12);
        }
        assert!(layer_forward(&[1.0], &spec, &params).is_err());
    }

    #[test]
    fn binary_layer_reproduces_catalog_rows() {
        // Two antecedents per channel, twelve channels, identity-like weights.
        let spec = LayerSpec::new(2, 12, Activation::Nary { arity: 2 }).unwrap();
        let weights: Vec<f64> = (0..24).flat_map(|r| if r % 2 == 0 { [1.0, 0.0] } else { [0.0, 1.0] }).collect();
        let rows: Vec<[f64; 4]> = catalog().iter().map(|e| e.params).collect();
        let params = LayerParams { weights, theta: Some(ParamTable::from_rows(&rows).unwrap()) };
        let cache = layer_forward(&[20.0, -20.0], &spec, &params).unwrap();
        for (k, e) in catalog().iter().enumerate() {
            assert!((cache.output[k] - e.table[1]).abs() < 1e-12, "{}", e.name);
        }
    }

    #[test]
    fn relu_and_pair_activations() {
        let relu = LayerSpec::new(2, 2, Activation::Relu).unwrap();
        let p = LayerParams { weights: vec![1.0, 0.0, 0.0, 1.0], theta: None };
        assert_eq!(layer_forward(&[2.0, -3.0], &relu, &p).unwrap().output, vec![2.0, 0.0]);

        let maxail = LayerSpec::new(2, 1, Activation::Maxail).unwrap();
        let out = layer_forward(&[2.0, -3.0], &maxail, &p).unwrap().output;
        assert_eq!(out, vec![ail(AilKind::Or, 2.0, -3.0)]);
        assert_eq!(out, vec![2.0]);

        let maxmin = LayerSpec::new(2, 2, Activation::Maxmin).unwrap();
        assert_eq!(layer_forward(&[2.0, -3.0], &maxmin, &p).unwrap().output, vec![2.0, -3.0]);
        assert!(LayerSpec::new(2, 3, Activation::Maxmin).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let spec = NetworkSpec::sized(4, &[6, 3], Activation::Nary { arity: 2 }).unwrap();
        let params = NetworkParams::zeros(&spec).unwrap();
        let out = network_forward(&spec, &params, &[6.91, -6.91, 6.91, 6.91]).unwrap();
        assert_eq!(out, vec![0.0; 3]);
        let r = network_backward(&spec, &params, &[6.91, -6.91, 6.91, 6.91], &[6.91, -6.91, 6.91]).unwrap();
        // Cross-entropy of soft targets against p = 0.5 is ln 2.
        assert!((r.loss - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn upstream_linearity() {
        let spec = NetworkSpec::sized(5, &[4, 2], Activation::Nary { arity: 3 }).unwrap();
        let params = NetworkParams::init(&spec, 3).unwrap();
        let x = [0.3, -1.2, 2.0, 0.8, -0.4];
        let g1 = network_backward_with_upstream(&spec, &params, &x, &[0.7, -0.2]).unwrap();
        let g2 = network_backward_with_upstream(&spec, &params, &x, &[1.4, -0.4]).unwrap();
        for (a, b) in g1.groups().into_iter().zip(g2.groups()) {
            for (u, v) in a.iter().zip(b) {
                assert_eq!(2.0 * u, *v);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let spec = NetworkSpec::sized(3, &[4, 2], Activation::Nary { arity: 2 }).unwrap();
        let params = NetworkParams::init(&spec, 9).unwrap();
        let ck = Checkpoint::new(&spec, &params).unwrap();
        let text = serde_json::to_string(&ck).unwrap();
        assert!(text.contains("\"layout\":\"bit1-lsb\""));
        let back: Checkpoint = serde_json::from_str(&text).unwrap();
        let (s2, p2) = back.into_parts().unwrap();
        assert_eq!(s2, spec);
        assert_eq!(p2, params);
    }

    #[test]
    fn spec_validation() {
        assert!(NetworkSpec::new(vec![]).is_err());
        let a = LayerSpec::new(3, 4, Activation::Relu).unwrap();
        let b = LayerSpec::new(5, 2, Activation::Relu).unwrap();
        assert!(NetworkSpec::new(vec![a, b]).is_err());
        assert!(Activation::parse("nary", 9).is_err());
        assert!(Activation::parse("tanh", 2).is_err());
        assert_eq!(Activation::parse("nary", 3).unwrap(), Activation::Nary { arity: 3 });
    }
}
