//! Minibatch ADAM training with validation-based checkpoint selection.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, adaptive_l1_weight_with, AdamConfig, AdamState};
use super::loss::{loss_bce_logits, sign_accuracy};
use super::{network_backward, network_forward, GroupKind, NetworkParams, NetworkSpec};
use crate::error::{invalid, Result};
use crate::logicgen::{Dataset, Split};
use crate::logit::sgn;
use crate::rng::{stream_rng, Stream};

/// How the L1 penalty on linear weights is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum L1Mode {
    Off,
    /// `fraction` times the `quantile` rank of each weight matrix's average gradient magnitudes.
    Adaptive { quantile: f64, fraction: f64 },
    Fixed { weight: f64 },
}

impl Default for L1Mode {
    fn default() -> Self {
        L1Mode::Adaptive { quantile: 15.0 / 16.0, fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub l1_mode: L1Mode,
    pub l2_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 16,
            learning_rate: 5e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            l1_mode: L1Mode::default(),
            l2_weight: 0.0,
            seed: 1,
        }
    }
}

impl TrainConfig {
    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid("epochs and batch size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.adam_eps > 0.0) {
            return Err(invalid("learning rate and epsilon must be positive"));
        }
        if !((0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2)) {
            return Err(invalid("ADAM betas must lie in [0, 1)"));
        }
        if self.l2_weight < 0.0 {
            return Err(invalid("L2 weight must be non-negative"));
        }
        match self.l1_mode {
            L1Mode::Adaptive { quantile, fraction }
                if !(quantile > 0.0 && quantile <= 1.0 && fraction >= 0.0) =>
            {
                Err(invalid("adaptive L1 needs quantile in (0, 1] and non-negative fraction"))
            }
            L1Mode::Fixed { weight } if weight < 0.0 => Err(invalid("L1 weight must be non-negative")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train: SplitMetrics,
    pub val: SplitMetrics,
    pub test: SplitMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochMetrics>,
    /// 1-based epoch with the lowest validation loss (earliest on ties).
    pub best_epoch: usize,
    pub best_params: NetworkParams,
}

impl TrainReport {
    pub fn best(&self) -> &EpochMetrics {
        &self.epochs[self.best_epoch - 1]
    }

    /// Columns `epoch,split,loss,accuracy`, one row per epoch and split.
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("epoch,split,loss,accuracy\n");
        for e in &self.epochs {
            for (name, m) in [("train", e.train), ("val", e.val), ("test", e.test)] {
                let _ = writeln!(s, "{},{name},{},{}", e.epoch, m.loss, m.accuracy);
            }
        }
        s
    }
}

/// Mean cross-entropy and sign accuracy of a network on a split.
pub fn evaluate(spec: &NetworkSpec, params: &NetworkParams, split: &Split) -> Result<SplitMetrics> {
    let z = network_forward(spec, params, &split.inputs)?;
    Ok(SplitMetrics {
        loss: loss_bce_logits(&z, &split.targets)?,
        accuracy: sign_accuracy(&z, &split.targets),
    })
}

fn check_dataset(spec: &NetworkSpec, data: &Dataset) -> Result<()> {
    for (name, s) in [("train", &data.train), ("val", &data.val), ("test", &data.test)] {
        if s.is_empty() {
            return Err(invalid(format!("{name} split is empty")));
        }
        if s.n_in != spec.in_width() || s.n_out != spec.out_width() {
            return Err(invalid(format!(
                "{name} split is {}→{} but the network is {}→{}",
                s.n_in,
                s.n_out,
                spec.in_width(),
                spec.out_width()
            )));
        }
    }
    Ok(())
}

/// Train from parameters initialized with `config.seed`.
pub fn train(spec: &NetworkSpec, data: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    let params = NetworkParams::init(spec, config.seed)?;
    train_with_params(spec, params, data, config)
}

/// Train from the given parameters, keeping the epoch with the lowest validation loss.
pub fn train_with_params(
    spec: &NetworkSpec,
    mut params: NetworkParams,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    params.check(spec)?;
    check_dataset(spec, data)?;
    let adam = config.adam();
    let mut state = AdamState::new(params.groups_mut().iter().map(|(_, g)| g.len()));
    let mut shuffle = stream_rng(config.seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let (n_in, n_out) = (spec.in_width(), spec.out_width());
    let mut inputs = Vec::with_capacity(config.batch_size * n_in);
    let mut targets = Vec::with_capacity(config.batch_size * n_out);

    let mut epochs = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, NetworkParams)> = None;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle);
        for batch in order.chunks(config.batch_size) {
            inputs.clear();
            targets.clear();
            for &r in batch {
                inputs.extend_from_slice(data.train.input(r));
                targets.extend_from_slice(data.train.target(r));
            }
            let result = network_backward(spec, &params, &inputs, &targets)?;
            let mut total: Vec<Vec<f64>> = result.grads.groups().iter().map(|g| g.to_vec()).collect();
            let mut groups = params.groups_mut();
            for (gi, ((kind, p), g)) in groups.iter().zip(total.iter_mut()).enumerate() {
                let l1 = match (kind, config.l1_mode) {
                    (GroupKind::Weights, L1Mode::Fixed { weight }) => weight,
                    (GroupKind::Weights, L1Mode::Adaptive { quantile, fraction }) => {
                        let mags = state.avg_grad_magnitudes(gi, config.adam_beta1);
                        if mags.is_empty() {
                            0.0
                        } else {
                            adaptive_l1_weight_with(&mags, quantile, fraction)?
                        }
                    }
                    _ => 0.0,
                };
                if l1 != 0.0 || config.l2_weight != 0.0 {
                    for (gj, &pj) in g.iter_mut().zip(p.iter()) {
                        *gj += l1 * sgn(pj) + config.l2_weight * pj;
                    }
                }
            }
            let mut slices: Vec<&mut [f64]> = groups.iter_mut().map(|(_, p)| &mut **p).collect();
            let grad_refs: Vec<&[f64]> = total.iter_mut().map(|g| &**g).collect();
            adam_step(&mut slices, &grad_refs, &mut state, &adam)?;
        }
        let metrics = EpochMetrics {
            epoch,
            train: evaluate(spec, &params, &data.train)?,
            val: evaluate(spec, &params, &data.val)?,
            test: evaluate(spec, &params, &data.test)?,
        };
        if best.as_ref().is_none_or(|(_, loss, _)| metrics.val.loss < *loss) {
            best = Some((epoch, metrics.val.loss, params.clone()));
        }
        epochs.push(metrics);
    }
    let (best_epoch, _, best_params) = best.expect("at least one epoch");
    Ok(TrainReport { epochs, best_epoch, best_params })
}
