//! ADAM with bias correction, and the adaptive L1 weight rule.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-2, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment accumulators, one per parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(group_sizes: impl IntoIterator<Item = usize>) -> Self {
        let sizes: Vec<usize> = group_sizes.into_iter().collect();
        Self {
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    /// Bias-corrected first-moment magnitudes of one group; empty before the first step.
    pub fn avg_grad_magnitudes(&self, group: usize, beta1: f64) -> Vec<f64> {
        if self.step == 0 {
            return Vec::new();
        }
        let c = 1.0 - beta1.powi(self.step as i32);
        self.m[group].iter().map(|m| (m / c).abs()).collect()
    }
}

/// One bias-corrected ADAM update over every group.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(invalid("parameter, gradient, and moment groups disagree"));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.len() != g.len() || p.len() != m.len() {
            return Err(invalid("parameter and gradient group sizes disagree"));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for (((pi, &gi), mi), vi) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = config.beta1 * *mi + (1.0 - config.beta1) * gi;
            *vi = config.beta2 * *vi + (1.0 - config.beta2) * gi * gi;
            let mhat = *mi / c1;
            let vhat = *vi / c2;
            *pi -= config.learning_rate * mhat / (vhat.sqrt() + config.eps);
        }
    }
    Ok(())
}

/// `fraction` times the element at ascending rank `⌈quantile · N⌉` (1-based).
pub fn adaptive_l1_weight_with(mags: &[f64], quantile: f64, fraction: f64) -> Result<f64> {
    if mags.is_empty() {
        return Err(invalid("adaptive L1 needs at least one gradient magnitude"));
    }
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(invalid(format!("quantile must lie in (0, 1], got {quantile}")));
    }
    let mut sorted = mags.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((quantile * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(fraction * sorted[rank - 1])
}

/// L1 weight from average gradient magnitudes: 0.1 times the 15/16 quantile.
pub fn adaptive_l1_weight(mags: &[f64]) -> Result<f64> {
    adaptive_l1_weight_with(mags, 15.0 / 16.0, 0.1)
}
