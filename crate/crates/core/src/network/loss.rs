//! Cross-entropy between predicted logits and soft targets given as logits.

use crate::error::{invalid, Result};
use crate::logit::{sigmoid, softplus};

/// `-t ln σ(z) - (1 - t) ln σ(-z)` with `t = σ(target)`, in softplus form.
#[inline]
pub fn bce_logits(z: f64, target: f64) -> f64 {
    let t = sigmoid(target);
    t * softplus(-z) + (1.0 - t) * softplus(z)
}

/// `∂/∂z` of [`bce_logits`].
#[inline]
pub fn bce_grad(z: f64, target: f64) -> f64 {
    sigmoid(z) - sigmoid(target)
}

/// Mean cross-entropy over paired outputs.
pub fn loss_bce_logits(z: &[f64], target: &[f64]) -> Result<f64> {
    if z.len() != target.len() {
        return Err(invalid(format!("{} outputs vs {} targets", z.len(), target.len())));
    }
    if z.is_empty() {
        return Ok(0.0);
    }
    Ok(z.iter().zip(target).map(|(&a, &b)| bce_logits(a, b)).sum::<f64>() / z.len() as f64)
}

#[inline]
fn signum0(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Fraction of outputs whose sign matches the target's. A zero output matches nothing.
pub fn sign_accuracy(z: &[f64], target: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let hits = z
        .iter()
        .zip(target)
        .filter(|(&a, &b)| signum0(a) == signum0(b) && signum0(b) != 0)
        .count();
    hits as f64 / z.len() as f64
}
