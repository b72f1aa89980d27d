//! Built-in verification checks.
//!
//! Each check samples from the `Verify` random stream, compares the library
//! against an independent evaluation, and reports pass/fail with a short detail
//! line and its wall-clock time.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::logicgen::{count_binary_compositions, COMPOSITION_CANDIDATES};
use crate::logit::{logsumexp, lsem, unary_forward, unary_forward_four_term, UnaryRow};
use crate::nary::{
    ail, backward_channel, forward_channel, levels_len, nary_backward, nary_backward_exact,
    nary_forward, AilKind,
};
use crate::network::{Activation, LayerSpec};
use crate::rng::{stream_rng, Stream};
use crate::table::{
    build_basis, catalog, irrelevant_antecedents, params_to_table, params_row_to_table,
    table_irrelevant_antecedents, table_to_params, BeliefTable, ParamTable,
};

/// Names accepted by [`run_check`], in the order [`run_all`] runs them.
pub const CHECKS: [&str; 11] = [
    "count-compositions",
    "catalog",
    "basis",
    "lsem-bound",
    "unary-identity",
    "saturation",
    "irrelevance",
    "gradient",
    "attenuation",
    "ail-recovery",
    "param-counts",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Flip one sign of the arity-2 basis used by the catalog check.
    pub basis_sign_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1, basis_sign_fault: false }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<20} {:>9.3} ms  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64() * 1e3,
            self.detail
        )
    }
}

type CheckFn = fn(&mut ChaCha8Rng, &VerifyOptions) -> Result<(bool, String)>;

fn lookup(name: &str) -> Option<(&'static str, CheckFn)> {
    let f: CheckFn = match name {
        "count-compositions" => check_compositions,
        "catalog" => check_catalog,
        "basis" => check_basis,
        "lsem-bound" => check_lsem_bound,
        "unary-identity" => check_unary_identity,
        "saturation" => check_saturation,
        "irrelevance" => check_irrelevance,
        "gradient" => check_gradient,
        "attenuation" => check_attenuation,
        "ail-recovery" => check_ail_recovery,
        "param-counts" => check_param_counts,
        _ => return None,
    };
    CHECKS.iter().find(|c| **c == name).map(|c| (*c, f))
}

/// Run one named check.
pub fn run_check(name: &str, opts: &VerifyOptions) -> Result<CheckOutcome> {
    let (name, f) = lookup(name).ok_or_else(|| {
        invalid(format!("unknown check {name:?}; expected one of {}", CHECKS.join(", ")))
    })?;
    let mut rng = stream_rng(opts.seed, Stream::Verify);
    let start = Instant::now();
    let (passed, detail) = match f(&mut rng, opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Ok(CheckOutcome { name, passed, detail, elapsed: start.elapsed() })
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|name| run_check(name, opts).expect("listed checks exist"))
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| uniform(rng, lo, hi)).collect()
}

fn check_compositions(_: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let count = count_binary_compositions();
    Ok((count == 1208, format!("{count} distinct functions from {COMPOSITION_CANDIDATES} candidates")))
}

fn check_catalog(_: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<(bool, String)> {
    let basis = build_basis(2)?;
    let sign = |r: usize, c: usize| {
        let s = f64::from(basis.get(r, c));
        if opts.basis_sign_fault && (r, c) == (1, 0) {
            -s
        } else {
            s
        }
    };
    let mut bad = Vec::new();
    for entry in catalog() {
        let ok = (0..4).all(|j| {
            let a: f64 = (0..4).map(|l| entry.params[l] * sign(l, j)).sum();
            (a - entry.table[j]).abs() <= 1e-12
        });
        if !ok {
            bad.push(entry.name);
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{} rows satisfy theta B = A", catalog().len())))
    } else {
        Ok((false, format!("mismatched rows: {}", bad.join(", "))))
    }
}

fn check_basis(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    for n in 1..=8 {
        let b = build_basis(n)?;
        let size = b.size() as i64;
        let gram = b.gram();
        let ok = gram.iter().enumerate().all(|(idx, &g)| {
            let diag = idx / b.size() == idx % b.size();
            g == if diag { size } else { 0 }
        });
        if !ok {
            return Ok((false, format!("B Bᵀ ≠ 2^n I at n = {n}")));
        }
    }
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let n = 1 + t % 6;
        let theta = ParamTable::new(n, 1, random_vec(rng, 1 << n, -10.0, 10.0))?;
        let back = table_to_params(&params_to_table(&theta)?)?;
        for (a, b) in theta.entries().iter().zip(back.entries()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= 1e-12, format!("orthogonal for n ≤ 8; round-trip error {worst:.2e}")))
}

fn check_lsem_bound(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let mut violations = 0;
    let mut terms = Vec::with_capacity(8);
    for _ in 0..100_000 {
        let len = rng.gen_range(2..=8);
        terms.clear();
        terms.extend((0..len).map(|_| uniform(rng, -20.0, 20.0)));
        let gap = logsumexp(&terms)? - lsem(&terms)?;
        if !(gap >= 0.0 && gap <= (len as f64).ln()) {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("{violations} violations in 100000 sequences")))
}

fn check_unary_identity(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let y = uniform(rng, -20.0, 20.0);
        let row = UnaryRow::new(uniform(rng, -20.0, 20.0), uniform(rng, -20.0, 20.0));
        worst = worst.max((unary_forward(y, row) - unary_forward_four_term(y, row)).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e} over 100000 inputs")))
}

/// Table entry selected by the signs of `y`.
fn vertex(y: &[f64]) -> usize {
    y.iter().enumerate().filter(|(_, &v)| v > 0.0).fold(0, |acc, (i, _)| acc | 1 << i)
}

fn check_saturation(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let (mut near, mut beyond): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let row = UnaryRow::new(uniform(rng, -20.0, 20.0), uniform(rng, -20.0, 20.0));
        let d = row.diff().abs();
        near = near.max((unary_forward(d + 1e-6, row) - row.a1).abs());
        near = near.max((unary_forward(-d - 1e-6, row) - row.a0).abs());
        let far = d + uniform(rng, 0.0, 20.0);
        beyond = beyond.max((unary_forward(far, row) - row.a1).abs());
        beyond = beyond.max((unary_forward(-far, row) - row.a0).abs());
    }
    let mut lookup: f64 = 0.0;
    for t in 0..1000 {
        let n = 1 + t % 5;
        let theta = ParamTable::new(n, 1, random_vec(rng, 1 << n, -3.0, 3.0))?;
        let table = params_to_table(&theta)?;
        let bound = 2.0 * table.entries().iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let y: Vec<f64> = (0..n)
            .map(|_| {
                let mag = bound + uniform(rng, 0.0, 5.0);
                if rng.gen() { mag } else { -mag }
            })
            .collect();
        let (z, _) = nary_forward(&y, &theta)?;
        lookup = lookup.max((z[0] - table.row(0)[vertex(&y)]).abs());
    }
    let passed = near <= 1e-9 && beyond <= 1e-12 && lookup <= 1e-12;
    Ok((passed, format!("edge {near:.1e}, interior {beyond:.1e}, n-ary lookup {lookup:.1e}")))
}

fn check_irrelevance(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let mut failures = 0;
    for t in 0..1000 {
        let n = 1 + t % 5;
        let i = rng.gen_range(0..n);
        let mut entries = random_vec(rng, 1 << n, -5.0, 5.0);
        for (j, e) in entries.iter_mut().enumerate() {
            if (j >> i) & 1 == 1 {
                *e = 0.0;
            }
        }
        let theta = ParamTable::new(n, 1, entries)?;
        let mut y = random_vec(rng, n, -10.0, 10.0);
        let (z, _) = nary_forward(&y, &theta)?;
        y[i] = -y[i];
        let (flipped, _) = nary_forward(&y, &theta)?;
        let detected = irrelevant_antecedents(theta.row(0), 1e-9)?;
        let table = params_to_table(&theta)?;
        let reflected = table_irrelevant_antecedents(table.row(0), 1e-12)?;
        if z[0] != flipped[0] || !detected.contains(&(i + 1)) || detected.len() != 1 || !reflected.contains(&(i + 1)) {
            failures += 1;
            continue;
        }
        // Converse: a reflection-symmetric table has zero antisymmetric parameters.
        let mut sym = random_vec(rng, 1 << n, -5.0, 5.0);
        for j in 0..sym.len() {
            if (j >> i) & 1 == 1 {
                sym[j] = sym[j ^ (1 << i)];
            }
        }
        let params = table_to_params(&BeliefTable::new(n, 1, sym)?)?;
        if !irrelevant_antecedents(params.row(0), 1e-12)?.contains(&(i + 1)) {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("{failures} failures over 1000 tables")))
}

/// Smallest distance from any max or absolute-value kink along the fold.
fn kink_margin(y: &[f64], levels: &[f64]) -> f64 {
    let n = y.len();
    let mut margin = f64::INFINITY;
    let mut off = 0;
    for (i, &yi) in y.iter().enumerate() {
        let width = 1 << (n - i);
        for p in levels[off..off + width].chunks_exact(2) {
            let (s, d) = (p[0] + p[1], p[1] - p[0]);
            let ay = yi.abs();
            margin = margin
                .min(ay)
                .min((d + yi).abs())
                .min((d - yi).abs())
                .min((ay + s - (d + yi).abs()).abs())
                .min((ay - s - (d - yi).abs()).abs());
        }
        off += width;
    }
    margin
}

/// Draw antecedents and parameters whose fold stays at least `margin` from every kink.
fn tie_free_sample(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut table = vec![0.0; 1 << n];
    let mut levels = vec![0.0; levels_len(n)];
    loop {
        let y = random_vec(rng, n, -6.0, 6.0);
        let theta = random_vec(rng, 1 << n, -3.0, 3.0);
        params_row_to_table(&theta, &mut table);
        forward_channel(&y, &table, &mut levels);
        if kink_margin(&y, &levels) > margin {
            return (y, theta, levels);
        }
    }
}

fn check_gradient(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    const H: f64 = 1e-5;
    let (mut magnitude_bad, mut sparsity_bad) = (0, 0);
    let mut worst_fd: f64 = 0.0;
    let mut scratch = Vec::new();
    for t in 0..10_000 {
        let n = 1 + t % 5;
        let (y, theta_row, levels) = tie_free_sample(rng, n, 1e-3);
        let upstream = uniform(rng, 0.5, 2.0) * if rng.gen() { 1.0 } else { -1.0 };
        let mut gy = vec![0.0; n];
        let mut ga = vec![0.0; 1 << n];
        scratch.resize(2 << n, 0.0);
        backward_channel(&y, &levels, upstream, &mut gy, &mut ga, &mut scratch);
        if gy.iter().any(|g| *g != 0.0 && g.abs() != upstream.abs()) {
            magnitude_bad += 1;
        }
        let nonzero: Vec<f64> = ga.iter().copied().filter(|g| *g != 0.0).collect();
        if nonzero.len() > 1 || nonzero.iter().any(|g| g.abs() != upstream.abs()) {
            sparsity_bad += 1;
        }
        if t % 10 != 0 {
            continue;
        }
        // Central differences through the public parameter-space API.
        let theta = ParamTable::new(n, 1, theta_row.clone())?;
        let (_, state) = nary_forward(&y, &theta)?;
        let (grad_y, grad_theta) = nary_backward(&state, &theta, &[upstream])?;
        let f = |y: &[f64], th: &[f64]| -> Result<f64> {
            let (z, _) = nary_forward(y, &ParamTable::new(n, 1, th.to_vec())?)?;
            Ok(upstream * z[0])
        };
        let rel = |fd: f64, an: f64| (fd - an).abs() / an.abs().max(1.0);
        for i in 0..n {
            let (mut yp, mut ym) = (y.clone(), y.clone());
            yp[i] += H;
            ym[i] -= H;
            let fd = (f(&yp, &theta_row)? - f(&ym, &theta_row)?) / (2.0 * H);
            worst_fd = worst_fd.max(rel(fd, grad_y[i]));
        }
        for j in 0..1 << n {
            let (mut tp, mut tm) = (theta_row.clone(), theta_row.clone());
            tp[j] += H;
            tm[j] -= H;
            let fd = (f(&y, &tp)? - f(&y, &tm)?) / (2.0 * H);
            worst_fd = worst_fd.max(rel(fd, grad_theta.row(0)[j]));
        }
    }
    let passed = magnitude_bad == 0 && sparsity_bad == 0 && worst_fd <= 1e-5;
    Ok((
        passed,
        format!(
            "magnitude violations {magnitude_bad}, table sparsity violations {sparsity_bad}, \
             finite-difference rel. error {worst_fd:.1e}"
        ),
    ))
}

fn check_attenuation(rng: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let n = 4;
    let upstream = 1.0;
    let table = BeliefTable::new(n, 1, random_vec(rng, 1 << n, -5.0, 5.0))?;
    let exact = nary_backward_exact(&[0.0; 4], &table, &[upstream])?;
    let expected = upstream / 16.0;
    let worst = exact.table.iter().fold(0.0f64, |m, g| m.max((g - expected).abs()));
    let sum_err = (exact.table.iter().sum::<f64>() - upstream).abs();

    // LSEM path at the same uncertain inputs, on tables with distinct positive entries.
    let mut single = true;
    for _ in 0..100 {
        let t = random_vec(rng, 1 << n, 0.5, 5.0);
        let mut levels = vec![0.0; levels_len(n)];
        forward_channel(&[0.0; 4], &t, &mut levels);
        let (mut gy, mut ga, mut scratch) = (vec![0.0; n], vec![0.0; 1 << n], vec![0.0; 2 << n]);
        backward_channel(&[0.0; 4], &levels, upstream, &mut gy, &mut ga, &mut scratch);
        let nonzero: Vec<f64> = ga.into_iter().filter(|g| *g != 0.0).collect();
        single &= nonzero.len() == 1 && nonzero[0].abs() == upstream;
    }
    let passed = worst <= 1e-9 && sum_err <= 1e-9 && single;
    Ok((
        passed,
        format!(
            "exact entries upstream/16 within {worst:.1e}, sum error {sum_err:.1e}, \
             LSEM path {}",
            if single { "single full-magnitude entry" } else { "spread" }
        ),
    ))
}

fn check_ail_recovery(_: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let alpha = 100.0;
    let mut worst: f64 = 0.0;
    for kind in AilKind::ALL {
        let row: Vec<f64> = kind.truth_table().iter().map(|v| alpha * v).collect();
        let theta = table_to_params(&BeliefTable::from_rows(&[row])?)?;
        for a in 0..41 {
            for b in 0..41 {
                let y = [-10.0 + 0.5 * a as f64, -10.0 + 0.5 * b as f64];
                let (z, _) = nary_forward(&y, &theta)?;
                worst = worst.max((z[0] - ail(kind, y[0], y[1])).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.1e} on a 41×41 grid")))
}

fn check_param_counts(_: &mut ChaCha8Rng, _: &VerifyOptions) -> Result<(bool, String)> {
    let counts = (1..=4)
        .map(|n| LayerSpec::new(32, 32, Activation::Nary { arity: n }).map(|l| l.param_count()))
        .collect::<Result<Vec<_>>>()?;
    Ok((counts == [1088, 2176, 3328, 4608], format!("32×32 layers, n = 1..4: {counts:?}")))
}
