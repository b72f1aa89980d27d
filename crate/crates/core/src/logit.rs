//! Scalar logit arithmetic and the adaptive unary activation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::LOGIT_CLAMP;

/// Log-odds of a Bernoulli probability. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogitValue(f64);

impl LogitValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(invalid(format!("logit must be finite, got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        sigmoid(self.0)
    }

    /// Logit of a probability strictly inside (0, 1).
    pub fn from_prob(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("probability must lie in (0, 1), got {p}")));
        }
        Self::new((p / (1.0 - p)).ln())
    }
}

impl TryFrom<f64> for LogitValue {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LogitValue> for f64 {
    fn from(v: LogitValue) -> f64 {
        v.0
    }
}

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Probability implied by a logit.
pub fn logit_to_prob(v: f64) -> Result<f64> {
    Ok(LogitValue::new(v)?.prob())
}

/// `ln(1 + e^v)` without overflow.
#[inline]
pub fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// Exact `log Σ exp(t_i)`, shifted by the maximum.
pub fn logsumexp(terms: &[f64]) -> Result<f64> {
    let m = lsem(terms)?;
    let sum: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    Ok(m + sum.ln())
}

/// The log-sum-exp max approximation: `log Σ exp(t_i) ≈ max t_i`.
///
/// The error `logsumexp(t) - lsem(t)` always lies in `[0, ln len(t)]`.
pub fn lsem(terms: &[f64]) -> Result<f64> {
    let (first, rest) = terms
        .split_first()
        .ok_or_else(|| invalid("lsem needs at least one term"))?;
    let mut m = *first;
    for &t in std::iter::once(first).chain(rest) {
        if !t.is_finite() {
            return Err(invalid(format!("lsem term must be finite, got {t}")));
        }
        if t > m {
            m = t;
        }
    }
    Ok(m)
}

/// A unary belief table: consequent logits given a false (`a0`) or true (`a1`) antecedent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnaryRow {
    pub a0: f64,
    pub a1: f64,
}

impl UnaryRow {
    pub fn new(a0: f64, a1: f64) -> Self {
        Self { a0, a1 }
    }

    /// `a0 + a1`
    #[inline]
    pub fn sum(&self) -> f64 {
        self.a0 + self.a1
    }

    /// `a1 - a0`
    #[inline]
    pub fn diff(&self) -> f64 {
        self.a1 - self.a0
    }
}

/// Gradients of the unary activation with respect to its antecedent and table entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnaryGrad {
    pub y: f64,
    pub a0: f64,
    pub a1: f64,
}

/// Adaptive unary activation:
///
/// `z = ½ [max(|y| + s, |d + y|) - max(|y| - s, |d - y|)]`
///
/// with `s = a0 + a1` and `d = a1 - a0`. For `y ≥ |d|` the output is `a1`, for
/// `y ≤ -|d|` it is `a0`, and in between it interpolates linearly toward zero.
#[inline]
pub fn unary_forward(y: f64, row: UnaryRow) -> f64 {
    let s = row.sum();
    let d = row.diff();
    let ay = y.abs();
    0.5 * ((ay + s).max((d + y).abs()) - (ay - s).max((d - y).abs()))
}

/// The unary activation written as the difference of two four-term maxima, one
/// per log-sum-exp of the exact logit-space marginalization.
pub fn unary_forward_four_term(y: f64, row: UnaryRow) -> f64 {
    let UnaryRow { a0, a1 } = row;
    let numerator = [
        (a0 - a1 - y) / 2.0,
        (a0 + a1 - y) / 2.0,
        (-a0 + a1 + y) / 2.0,
        (a0 + a1 + y) / 2.0,
    ];
    let denominator = [
        (-a0 + a1 - y) / 2.0,
        (-a0 - a1 - y) / 2.0,
        (-a0 - a1 + y) / 2.0,
        (a0 - a1 + y) / 2.0,
    ];
    let max4 = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    max4(numerator) - max4(denominator)
}

/// The same marginalization evaluated exactly, with log-sum-exp in place of max.
pub fn unary_forward_four_term_exact(y: f64, row: UnaryRow) -> f64 {
    let UnaryRow { a0, a1 } = row;
    let numerator = [
        (a0 - a1 - y) / 2.0,
        (a0 + a1 - y) / 2.0,
        (-a0 + a1 + y) / 2.0,
        (a0 + a1 + y) / 2.0,
    ];
    let denominator = [
        (-a0 + a1 - y) / 2.0,
        (-a0 - a1 - y) / 2.0,
        (-a0 - a1 + y) / 2.0,
        (a0 - a1 + y) / 2.0,
    ];
    // Both arrays are non-empty and finite for finite inputs.
    logsumexp(&numerator).unwrap_or(f64::NAN) - logsumexp(&denominator).unwrap_or(f64::NAN)
}

/// `sign(u)` with `sign(0) = 0`, used as the subgradient of `|u|`.
#[inline]
pub(crate) fn sgn(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient of [`unary_forward`], scaled by `upstream`.
///
/// Ties inside either max follow the first argument; `|u|` has subgradient 0 at
/// `u = 0`. Away from ties every returned magnitude is 0 or `|upstream|`, and at
/// most one of the table gradients is nonzero.
#[inline]
pub fn unary_backward(y: f64, row: UnaryRow, upstream: f64) -> UnaryGrad {
    let s = row.sum();
    let d = row.diff();
    let ay = y.abs();
    let sy = sgn(y);

    // Partials of the positive max P and negative max N with respect to (y, s, d).
    let (py, ps, pd) = if ay + s >= (d + y).abs() {
        (sy, 1.0, 0.0)
    } else {
        let g = sgn(d + y);
        (g, 0.0, g)
    };
    let (ny, ns, nd) = if ay - s >= (d - y).abs() {
        (sy, -1.0, 0.0)
    } else {
        let g = sgn(d - y);
        (-g, 0.0, g)
    };

    let gy = 0.5 * (py - ny);
    let gs = 0.5 * (ps - ns);
    let gd = 0.5 * (pd - nd);
    UnaryGrad {
        y: upstream * gy,
        a0: upstream * (gs - gd),
        a1: upstream * (gs + gd),
    }
}

/// Exact unary marginalization `q(Z) = p(Z|¬Y) q(¬Y) + p(Z|Y) q(Y)`, returned as a logit.
///
/// Inputs are clamped to `±LOGIT_CLAMP`. Both `q(Z)` and `q(¬Z)` are accumulated
/// directly so the final logit keeps full relative precision near certainty.
pub fn unary_forward_exact(y: f64, row: UnaryRow) -> Result<f64> {
    for v in [y, row.a0, row.a1] {
        if !v.is_finite() {
            return Err(invalid(format!("exact marginalization needs finite inputs, got {v}")));
        }
    }
    let y = clamp_logit(y);
    let (a0, a1) = (clamp_logit(row.a0), clamp_logit(row.a1));
    let (qy, qny) = (sigmoid(y), sigmoid(-y));
    let qz = sigmoid(a0) * qny + sigmoid(a1) * qy;
    let qnz = sigmoid(-a0) * qny + sigmoid(-a1) * qy;
    prob_pair_to_logit(qz, qnz)
}

#[inline]
pub(crate) fn clamp_logit(v: f64) -> f64 {
    v.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

/// `ln(p / q)` for a probability and its complement, each computed separately.
pub(crate) fn prob_pair_to_logit(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Range(format!(
            "marginal probability collapsed to certainty (p = {p}, 1 - p = {q})"
        )));
    }
    let z = p.ln() - q.ln();
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::Range(format!("logit of ({p}, {q}) is not finite")))
    }
}
