//! The adaptive n-ary activation and its exact probability-space counterpart.
//!
//! Antecedent logits for `channels` outputs arrive as a row-major matrix: entry
//! `k * n + i` is antecedent `i + 1` of channel `k`. Each channel folds its belief
//! table one antecedent at a time, pairing consecutive columns (antecedent 1)
//! first and the two halves of the table (antecedent `n`) last.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::logit::{
    clamp_logit, prob_pair_to_logit, sgn, sigmoid, unary_backward, unary_forward, UnaryRow,
};
use crate::table::{params_row_to_table, table_row_grad_to_params, BeliefTable, ParamTable};
use crate::MAX_ARITY;

/// Buffer length holding every partial table `A^(0..=n)` of one channel.
#[inline]
pub fn levels_len(n: usize) -> usize {
    (2 << n) - 1
}

#[inline]
fn level_offset(n: usize, i: usize) -> usize {
    (2 << n) - (2 << (n - i))
}

/// Fold one channel's belief table through its antecedents.
///
/// `levels` receives `A^(0)` through `A^(n)` back to back; the return value is
/// the single entry of `A^(n)`.
pub fn forward_channel(y: &[f64], table: &[f64], levels: &mut [f64]) -> f64 {
    let n = y.len();
    debug_assert_eq!(table.len(), 1 << n);
    debug_assert_eq!(levels.len(), levels_len(n));
    levels[..table.len()].copy_from_slice(table);
    let mut src = 0;
    for (i, &yi) in y.iter().enumerate() {
        let width = 1 << (n - i);
        let dst = src + width;
        let (before, after) = levels.split_at_mut(dst);
        let prev = &before[src..];
        for (j, out) in after[..width / 2].iter_mut().enumerate() {
            *out = unary_forward(yi, UnaryRow::new(prev[2 * j], prev[2 * j + 1]));
        }
        src = dst;
    }
    levels[levels.len() - 1]
}

/// Reverse pass for one channel.
///
/// Gradients are accumulated into `grad_y` and `grad_table` (the latter with
/// respect to `A^(0)`). `scratch` needs `2^(n+1)` slots.
pub fn backward_channel(
    y: &[f64],
    levels: &[f64],
    upstream: f64,
    grad_y: &mut [f64],
    grad_table: &mut [f64],
    scratch: &mut [f64],
) {
    let n = y.len();
    let full = 1usize << n;
    if upstream == 0.0 {
        return;
    }
    let (mut cur, mut next) = scratch[..2 * full].split_at_mut(full);
    cur[0] = upstream;
    let mut width = 1;
    for i in (0..n).rev() {
        let off = level_offset(n, i);
        let src = &levels[off..off + 2 * width];
        let mut gy = 0.0;
        for j in 0..width {
            let g = cur[j];
            if g == 0.0 {
                next[2 * j] = 0.0;
                next[2 * j + 1] = 0.0;
                continue;
            }
            let ug = unary_backward(y[i], UnaryRow::new(src[2 * j], src[2 * j + 1]), g);
            gy += ug.y;
            next[2 * j] = ug.a0;
            next[2 * j + 1] = ug.a1;
        }
        grad_y[i] += gy;
        width *= 2;
        std::mem::swap(&mut cur, &mut next);
    }
    for (acc, g) in grad_table.iter_mut().zip(cur.iter()) {
        *acc += g;
    }
}

/// Everything the backward pass needs from a forward evaluation.
#[derive(Debug, Clone)]
pub struct NaryState {
    arity: usize,
    channels: usize,
    antecedents: Vec<f64>,
    levels: Vec<f64>,
    theta_fingerprint: u64,
}

impl NaryState {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn antecedents(&self) -> &[f64] {
        &self.antecedents
    }

    /// Partial table `A^(i)` of channel `k`, with `2^(n - i)` entries.
    pub fn partial_table(&self, k: usize, i: usize) -> &[f64] {
        let n = self.arity;
        let base = k * levels_len(n) + level_offset(n, i);
        &self.levels[base..base + (1 << (n - i))]
    }

    pub fn output(&self, k: usize) -> f64 {
        self.partial_table(k, self.arity)[0]
    }
}

fn fingerprint(theta: &ParamTable) -> u64 {
    // FNV-1a over shape and entry bits.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    mix(theta.arity() as u64);
    mix(theta.channels() as u64);
    for v in theta.entries() {
        mix(v.to_bits());
    }
    h
}

fn check_shapes(y: &[f64], arity: usize, channels: usize) -> Result<()> {
    if !(1..=MAX_ARITY).contains(&arity) {
        return Err(invalid(format!("activation arity must lie in 1..={MAX_ARITY}, got {arity}")));
    }
    if y.len() != channels * arity {
        return Err(invalid(format!(
            "antecedent matrix has {} entries, expected {channels} × {arity}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("antecedent logits must be finite"));
    }
    Ok(())
}

/// Evaluate the n-ary activation for every channel.
pub fn nary_forward(y: &[f64], theta: &ParamTable) -> Result<(Vec<f64>, NaryState)> {
    let (n, c) = (theta.arity(), theta.channels());
    check_shapes(y, n, c)?;
    let width = 1 << n;
    let stride = levels_len(n);
    let mut levels = vec![0.0; c * stride];
    let mut table = vec![0.0; width];
    let mut z = Vec::with_capacity(c);
    for k in 0..c {
        params_row_to_table(theta.row(k), &mut table);
        z.push(forward_channel(
            &y[k * n..(k + 1) * n],
            &table,
            &mut levels[k * stride..(k + 1) * stride],
        ));
    }
    let state = NaryState {
        arity: n,
        channels: c,
        antecedents: y.to_vec(),
        levels,
        theta_fingerprint: fingerprint(theta),
    };
    Ok((z, state))
}

/// Backpropagate `upstream` (one value per channel) through a forward evaluation.
///
/// Returns the antecedent gradients (same layout as the forward input) and the
/// parameter gradients `∂J/∂A^(0) · Bᵀ`.
pub fn nary_backward(
    state: &NaryState,
    theta: &ParamTable,
    upstream: &[f64],
) -> Result<(Vec<f64>, ParamTable)> {
    if theta.arity() != state.arity
        || theta.channels() != state.channels
        || fingerprint(theta) != state.theta_fingerprint
    {
        return Err(invalid("state was not produced by a forward pass with these parameters"));
    }
    if upstream.len() != state.channels {
        return Err(invalid(format!(
            "upstream has {} entries for {} channels",
            upstream.len(),
            state.channels
        )));
    }
    let n = state.arity;
    let width = 1 << n;
    let stride = levels_len(n);
    let mut grad_y = vec![0.0; state.channels * n];
    let mut grad_theta = vec![0.0; state.channels * width];
    let mut grad_table = vec![0.0; width];
    let mut scratch = vec![0.0; 2 * width];
    for (k, &u) in upstream.iter().enumerate() {
        grad_table.fill(0.0);
        backward_channel(
            &state.antecedents[k * n..(k + 1) * n],
            &state.levels[k * stride..(k + 1) * stride],
            u,
            &mut grad_y[k * n..(k + 1) * n],
            &mut grad_table,
            &mut scratch,
        );
        table_row_grad_to_params(&grad_table, &mut grad_theta[k * width..(k + 1) * width]);
    }
    Ok((grad_y, ParamTable::new(n, state.channels, grad_theta)?))
}

/// Probability pairs `(q, 1 - q)` for each entry, computed from clamped logits.
fn prob_pairs(logits: &[f64]) -> Vec<(f64, f64)> {
    logits
        .iter()
        .map(|&a| {
            let a = clamp_logit(a);
            (sigmoid(a), sigmoid(-a))
        })
        .collect()
}

fn check_exact_inputs(y: &[f64], table: &BeliefTable) -> Result<()> {
    check_shapes(y, table.arity(), table.channels())
}

/// Exact independent-antecedent marginalization, antecedent 1 first.
///
/// Every intermediate stage carries both `q` and `1 - q` so the returned logits
/// stay accurate near certainty. Inputs are clamped to `±LOGIT_CLAMP`.
pub fn nary_forward_exact(y: &[f64], table: &BeliefTable) -> Result<Vec<f64>> {
    check_exact_inputs(y, table)?;
    let n = table.arity();
    let mut z = Vec::with_capacity(table.channels());
    for (k, row) in table.rows().enumerate() {
        let mut cur = prob_pairs(row);
        for &yi in &y[k * n..(k + 1) * n] {
            let yi = clamp_logit(yi);
            let (qt, qf) = (sigmoid(yi), sigmoid(-yi));
            cur = cur
                .chunks_exact(2)
                .map(|p| (p[0].0 * qf + p[1].0 * qt, p[0].1 * qf + p[1].1 * qt))
                .collect();
        }
        let (p, q) = cur[0];
        z.push(prob_pair_to_logit(p, q)?);
    }
    Ok(z)
}

/// Gradients of the probability-space marginalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGrad {
    /// `∂J/∂p(Z | vertex)`, `channels × 2^n`.
    pub table: Vec<f64>,
    /// `∂J/∂q(Y_i)`, `channels × n`.
    pub antecedents: Vec<f64>,
}

/// Backpropagate `∂J/∂q(Z)` (one per channel) through the direct marginalization.
///
/// Each table-entry gradient is the upstream value times the probability of its
/// antecedent vertex, so with `n` uncertain antecedents it shrinks geometrically.
pub fn nary_backward_exact(y: &[f64], table: &BeliefTable, upstream: &[f64]) -> Result<ExactGrad> {
    check_exact_inputs(y, table)?;
    if upstream.len() != table.channels() {
        return Err(invalid(format!(
            "upstream has {} entries for {} channels",
            upstream.len(),
            table.channels()
        )));
    }
    let n = table.arity();
    let width = table.width();
    let mut grad_table = vec![0.0; table.channels() * width];
    let mut grad_y = vec![0.0; table.channels() * n];
    for (k, row) in table.rows().enumerate() {
        let qs: Vec<f64> = y[k * n..(k + 1) * n]
            .iter()
            .map(|&v| sigmoid(clamp_logit(v)))
            .collect();
        // Forward, keeping each stage's probabilities.
        let mut stages: Vec<Vec<f64>> = vec![prob_pairs(row).into_iter().map(|p| p.0).collect()];
        for &q in &qs {
            let prev = stages.last().expect("non-empty");
            let next = prev.chunks_exact(2).map(|p| p[0] * (1.0 - q) + p[1] * q).collect();
            stages.push(next);
        }
        // Reverse.
        let mut g = vec![upstream[k]];
        for i in (0..n).rev() {
            let prev = &stages[i];
            let q = qs[i];
            let mut gprev = vec![0.0; 2 * g.len()];
            let mut gq = 0.0;
            for (j, &gj) in g.iter().enumerate() {
                gprev[2 * j] = gj * (1.0 - q);
                gprev[2 * j + 1] = gj * q;
                gq += gj * (prev[2 * j + 1] - prev[2 * j]);
            }
            grad_y[k * n + i] = gq;
            g = gprev;
        }
        grad_table[k * width..(k + 1) * width].copy_from_slice(&g);
    }
    Ok(ExactGrad { table: grad_table, antecedents: grad_y })
}

/// Fixed logit-space binary operations recovered as hard-table limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AilKind {
    And,
    Or,
    Xnor,
}

impl AilKind {
    pub const ALL: [AilKind; 3] = [AilKind::And, AilKind::Or, AilKind::Xnor];

    /// Hard truth table in `±1`, column order `bit1-lsb`.
    pub fn truth_table(self) -> [f64; 4] {
        match self {
            AilKind::And => [-1.0, -1.0, -1.0, 1.0],
            AilKind::Or => [-1.0, 1.0, 1.0, 1.0],
            AilKind::Xnor => [1.0, -1.0, -1.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AilKind::And => "and",
            AilKind::Or => "or",
            AilKind::Xnor => "xnor",
        }
    }
}

impl fmt::Display for AilKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AilKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "and" => Ok(AilKind::And),
            "or" => Ok(AilKind::Or),
            "xnor" => Ok(AilKind::Xnor),
            other => Err(invalid(format!("unknown AIL operation {other:?}"))),
        }
    }
}

/// `and → min(y1, y2, y1 + y2)`, `or → max(y1, y2, y1 + y2)`,
/// `xnor → sign(y1 y2) min(|y1|, |y2|)`.
pub fn ail(kind: AilKind, y1: f64, y2: f64) -> f64 {
    match kind {
        AilKind::And => y1.min(y2).min(y1 + y2),
        AilKind::Or => y1.max(y2).max(y1 + y2),
        AilKind::Xnor => sgn(y1 * y2) * y1.abs().min(y2.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{catalog_entry, table_to_params};

    #[test]
    fn and_saturated_lookup() {
        let theta = catalog_entry("and").unwrap().param_table(1.0);
        let (z, _) = nary_forward(&[10.0, 10.0], &theta).unwrap();
        assert!((z[0] - 1.0).abs() <= 1e-12);
        let (z, _) = nary_forward(&[10.0, -10.0], &theta).unwrap();
        assert!((z[0] + 1.0).abs() <= 1e-12);
        let exact = nary_forward_exact(&[10.0, 10.0], &catalog_entry("and").unwrap().belief_table(1.0))
            .unwrap();
        assert!((exact[0] - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn zero_parameters_give_zero() {
        for n in 1..=5 {
            let theta = ParamTable::zeros(n, 3).unwrap();
            let y: Vec<f64> = (0..3 * n).map(|i| i as f64 - 4.0).collect();
            let (z, _) = nary_forward(&y, &theta).unwrap();
            assert!(z.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn partial_tables_follow_pairing() {
        let table = BeliefTable::from_rows(&[[1.0, -2.0, 3.0, 0.5, -1.5, 2.0, 0.0, 4.0]]).unwrap();
        let theta = table_to_params(&table).unwrap();
        let y = [0.7, -1.1, 2.3];
        let (_, state) = nary_forward(&y, &theta).unwrap();
        for i in 1..=3 {
            let prev = state.partial_table(0, i - 1);
            let cur = state.partial_table(0, i);
            for j in 0..cur.len() {
                let expected = unary_forward(y[i - 1], UnaryRow::new(prev[2 * j], prev[2 * j + 1]));
                assert_eq!(cur[j], expected);
            }
        }
        assert_eq!(state.partial_table(0, 3).len(), 1);
    }

    #[test]
    fn shape_and_state_errors() {
        let theta = ParamTable::zeros(2, 2).unwrap();
        assert!(nary_forward(&[0.0; 3], &theta).is_err());
        let (_, state) = nary_forward(&[0.5; 4], &theta).unwrap();
        let mut other = theta.clone();
        other.entries_mut()[0] = 1.0;
        assert!(nary_backward(&state, &other, &[1.0, 1.0]).is_err());
        assert!(nary_backward(&state, &theta, &[1.0]).is_err());
        assert!(nary_backward(&state, &theta, &[1.0, 1.0]).is_ok());
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let theta = ParamTable::from_rows(&[[0.3, -0.2, 0.5, 0.9]]).unwrap();
        let (_, state) = nary_forward(&[0.4, -1.3], &theta).unwrap();
        let (gy, gt) = nary_backward(&state, &theta, &[0.0]).unwrap();
        assert!(gy.iter().chain(gt.entries()).all(|&v| v == 0.0));
    }

    #[test]
    fn exact_xor_examples() {
        let xor = catalog_entry("xor").unwrap().belief_table(30.0);
        let z = nary_forward_exact(&[0.0, 0.0], &xor).unwrap();
        assert!(z[0].abs() < 1e-12);

        // Hard table: q(Z) = p1 (1 - p2) + (1 - p1) p2.
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let z = nary_forward_exact(&[logit(0.9), logit(0.8)], &xor).unwrap();
        let q = sigmoid(z[0]);
        assert!((q - 0.26).abs() < 1e-9, "{q}");
    }

    #[test]
    fn exact_constant_table() {
        let t = BeliefTable::from_rows(&[[1.25; 8]]).unwrap();
        let z = nary_forward_exact(&[3.0, -7.0, 0.2], &t).unwrap();
        assert!((z[0] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn exact_gradient_examples() {
        let t = BeliefTable::from_rows(&[[0.3; 16]]).unwrap();
        let g = nary_backward_exact(&[0.0; 4], &t, &[1.0]).unwrap();
        assert!(g.table.iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-15));
        let t1 = BeliefTable::from_rows(&[[-2.0, 2.0]]).unwrap();
        let g = nary_backward_exact(&[30.0], &t1, &[1.0]).unwrap();
        assert!((g.table[1] - 1.0).abs() < 1e-12 && g.table[0].abs() < 1e-12);
    }

    #[test]
    fn ail_examples() {
        assert_eq!(ail(AilKind::And, 2.0, -3.0), -3.0);
        assert_eq!(ail(AilKind::Or, 2.0, -3.0), 2.0);
        assert_eq!(ail(AilKind::Xnor, 2.0, -3.0), -2.0);
        assert_eq!("xnor".parse::<AilKind>().unwrap(), AilKind::Xnor);
        assert!("nand".parse::<AilKind>().is_err());
    }
}
