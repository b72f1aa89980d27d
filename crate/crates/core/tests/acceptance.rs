//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softlogic::logicgen::{count_binary_compositions, generate_ground_truth, synthesize, GroundTruth, OutputFunction};
use softlogic::logit::{unary_forward, UnaryRow};
use softlogic::nary::{backward_channel, forward_channel, levels_len, nary_backward, nary_backward_exact, nary_forward};
use softlogic::network::{train, Activation, L1Mode, LayerSpec, NetworkSpec, TrainConfig, TrainReport};
use softlogic::table::{
    build_basis, catalog_entry, irrelevant_antecedents, params_to_table, table_to_params, BeliefTable,
    ParamTable,
};
use softlogic::Dataset;

type Outcome = Result<String, String>;

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn vec_in(r: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| r.gen_range(lo..hi)).collect()
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

/// Sign basis entry from its product definition: a factor of -1 wherever the row
/// bit is 1 and the column bit is 0.
fn basis_entry(n: usize, l: usize, j: usize) -> i64 {
    (0..n).map(|i| if (l >> i) & 1 == 1 && (j >> i) & 1 == 0 { -1 } else { 1 }).product()
}

// Catalog of binary operations: (name, A over vertices FF, TF, FT, TT, Θ).
const BINARY_OPS: [(&str, [f64; 4], [f64; 4]); 12] = [
    ("true", [1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0]),
    ("arg_1", [-1.0, 1.0, -1.0, 1.0], [0.0, 1.0, 0.0, 0.0]),
    ("not_2", [1.0, 1.0, -1.0, -1.0], [0.0, 0.0, -1.0, 0.0]),
    ("xor", [-1.0, 1.0, 1.0, -1.0], [0.0, 0.0, 0.0, -1.0]),
    ("relu_1", [0.0, 1.0, 0.0, 1.0], [0.5, 0.5, 0.0, 0.0]),
    ("relu_¬2", [1.0, 1.0, 0.0, 0.0], [0.5, 0.0, -0.5, 0.0]),
    ("relu_xor", [0.0, 1.0, 1.0, 0.0], [0.5, 0.0, 0.0, -0.5]),
    ("imply", [1.0, -1.0, 1.0, 1.0], [0.5, -0.5, 0.5, 0.5]),
    ("imply*", [0.0, -1.0, 0.0, 1.0], [0.0, 0.0, 0.5, 0.5]),
    ("and", [-1.0, -1.0, -1.0, 1.0], [-0.5, 0.5, 0.5, 0.5]),
    ("or", [-1.0, 1.0, 1.0, 1.0], [0.5, 0.5, 0.5, -0.5]),
    ("and*", [-1.0, 0.0, 0.0, 1.0], [0.0, 0.5, 0.5, 0.0]),
];

fn composition_count() -> Outcome {
    let start = Instant::now();
    // Independent enumeration: evaluate every composition on all 16 input vertices.
    let pairings = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
    let op = |f: u8, a: bool, b: bool| (f >> (a as u8 | (b as u8) << 1)) & 1 == 1;
    let mut seen = HashSet::new();
    let mut candidates = 0;
    for p in pairings {
        for f1 in 0..16u8 {
            for f2 in 0..16u8 {
                for f3 in 0..16u8 {
                    candidates += 1;
                    let mut table = 0u16;
                    for v in 0..16u16 {
                        let x = |i: usize| (v >> p[i]) & 1 == 1;
                        if op(f3, op(f1, x(0), x(1)), op(f2, x(2), x(3))) {
                            table |= 1 << v;
                        }
                    }
                    seen.insert(table);
                }
            }
        }
    }
    let lib = count_binary_compositions();
    within(start.elapsed(), 10.0)?;
    if candidates != 12288 || seen.len() != 1208 || lib != 1208 {
        return Err(format!("oracle {} of {candidates}, library {lib}", seen.len()));
    }
    Ok(format!("{lib} distinct functions from {candidates} candidates"))
}

fn catalog_rows() -> Outcome {
    let start = Instant::now();
    for (name, a, theta) in BINARY_OPS {
        for j in 0..4 {
            let v: f64 = (0..4).map(|l| theta[l] * basis_entry(2, l, j) as f64).sum();
            if (v - a[j]).abs() > 1e-12 {
                return Err(format!("{name}: entry {j} is {v}, expected {}", a[j]));
            }
        }
        let entry = catalog_entry(name).ok_or(format!("{name} missing from catalog"))?;
        let lib = params_to_table(&entry.param_table(1.0)).map_err(|e| e.to_string())?;
        let back = table_to_params(&entry.belief_table(1.0)).map_err(|e| e.to_string())?;
        if entry.table != a || entry.params != theta {
            return Err(format!("{name}: catalog values differ"));
        }
        for j in 0..4 {
            if (lib.row(0)[j] - a[j]).abs() > 1e-12 || (back.row(0)[j] - theta[j]).abs() > 1e-12 {
                return Err(format!("{name}: library conversion differs at {j}"));
            }
        }
    }
    within(start.elapsed(), 1.0)?;
    Ok("12 rows satisfy theta B = A".into())
}

fn basis_properties() -> Outcome {
    let start = Instant::now();
    for n in 1..=8 {
        let b = build_basis(n).map_err(|e| e.to_string())?;
        let size = 1usize << n;
        for l in 0..size {
            for j in 0..size {
                if i64::from(b.get(l, j)) != basis_entry(n, l, j) {
                    return Err(format!("n = {n}: entry ({l}, {j}) differs from product form"));
                }
            }
        }
        for (idx, g) in b.gram().into_iter().enumerate() {
            let expected = if idx / size == idx % size { size as i64 } else { 0 };
            if g != expected {
                return Err(format!("n = {n}: B Bᵀ entry {idx} is {g}"));
            }
        }
    }
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let n = 1 + t % 6;
        let theta = ParamTable::new(n, 1, vec_in(&mut r, 1 << n, -10.0, 10.0)).unwrap();
        let back = table_to_params(&params_to_table(&theta).unwrap()).unwrap();
        for (a, b) in theta.entries().iter().zip(back.entries()) {
            worst = worst.max((a - b).abs());
        }
    }
    within(start.elapsed(), 5.0)?;
    if worst > 1e-12 {
        return Err(format!("round-trip error {worst:e}"));
    }
    Ok(format!("B Bᵀ = 2^n I for n = 1..8; round-trip error {worst:.1e}"))
}

fn lsem_bound() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut violations = 0;
    for _ in 0..100_000 {
        let len = r.gen_range(2..=8usize);
        let t = vec_in(&mut r, len, -20.0, 20.0);
        let m = softlogic::logit::lsem(&t).unwrap();
        let exact = m + t.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let gap = exact - m;
        if !(0.0..=(len as f64).ln()).contains(&gap) {
            violations += 1;
        }
    }
    within(start.elapsed(), 5.0)?;
    if violations > 0 {
        return Err(format!("{violations} violations"));
    }
    Ok("0 violations in 100000 sequences".into())
}

fn unary_identity() -> Outcome {
    let start = Instant::now();
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let (y, a0, a1) = (r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0));
        let num = [(a0 - a1 - y) / 2.0, (a0 + a1 - y) / 2.0, (-a0 + a1 + y) / 2.0, (a0 + a1 + y) / 2.0];
        let den = [(-a0 + a1 - y) / 2.0, (-a0 - a1 - y) / 2.0, (-a0 - a1 + y) / 2.0, (a0 - a1 + y) / 2.0];
        let max = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let four = max(num) - max(den);
        worst = worst.max((unary_forward(y, UnaryRow::new(a0, a1)) - four).abs());
    }
    within(start.elapsed(), 5.0)?;
    if worst > 1e-12 {
        return Err(format!("max deviation {worst:e}"));
    }
    Ok(format!("max deviation {worst:.1e} over 100000 inputs"))
}

fn vertex_of(y: &[f64]) -> usize {
    y.iter().enumerate().filter(|(_, v)| **v > 0.0).fold(0, |acc, (i, _)| acc | 1 << i)
}

fn saturation() -> Outcome {
    let mut r = rng(6);
    let (mut edge, mut interior): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let row = UnaryRow::new(r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0));
        let d = (row.a1 - row.a0).abs();
        edge = edge.max((unary_forward(d + 1e-6, row) - row.a1).abs());
        edge = edge.max((unary_forward(-d - 1e-6, row) - row.a0).abs());
        let y = d + r.gen_range(0.0..20.0);
        interior = interior.max((unary_forward(y, row) - row.a1).abs());
        interior = interior.max((unary_forward(-y, row) - row.a0).abs());
    }
    let mut lookup: f64 = 0.0;
    for n in 1..=5 {
        for _ in 0..200 {
            let theta = ParamTable::new(n, 1, vec_in(&mut r, 1 << n, -3.0, 3.0)).unwrap();
            let table = params_to_table(&theta).unwrap();
            let big = 2.0 * table.entries().iter().fold(0.0f64, |m, a| m.max(a.abs()));
            for v in 0..1usize << n {
                let y: Vec<f64> = (0..n).map(|i| if (v >> i) & 1 == 1 { big } else { -big }).collect();
                let (z, _) = nary_forward(&y, &theta).unwrap();
                lookup = lookup.max((z[0] - table.row(0)[vertex_of(&y)]).abs());
            }
        }
    }
    if edge > 1e-9 || interior > 1e-12 || lookup > 1e-12 {
        return Err(format!("edge {edge:e}, interior {interior:e}, n-ary lookup {lookup:e}"));
    }
    Ok(format!("edge {edge:.1e}, interior {interior:.1e}, n-ary vertex lookup {lookup:.1e}"))
}

fn irrelevance() -> Outcome {
    let mut r = rng(7);
    for t in 0..1000 {
        let n = 1 + t % 5;
        let i = r.gen_range(0..n);
        let mut e = vec_in(&mut r, 1 << n, -5.0, 5.0);
        for (j, v) in e.iter_mut().enumerate() {
            if (j >> i) & 1 == 1 {
                *v = 0.0;
            }
        }
        let theta = ParamTable::new(n, 1, e).unwrap();
        let mut y = vec_in(&mut r, n, -10.0, 10.0);
        let z = nary_forward(&y, &theta).unwrap().0[0];
        y[i] = -y[i];
        let flipped = nary_forward(&y, &theta).unwrap().0[0];
        if z.to_bits() != flipped.to_bits() && !(z == 0.0 && flipped == 0.0) {
            return Err(format!("table {t}: output {z} changed to {flipped}"));
        }
        // Converse: recover the irrelevant set from the belief table alone.
        let table = params_to_table(&theta).unwrap();
        let recovered = irrelevant_antecedents(table_to_params(&table).unwrap().row(0), 1e-12).unwrap();
        if recovered.into_iter().collect::<Vec<_>>() != vec![i + 1] {
            return Err(format!("table {t}: irrelevant set not recovered"));
        }
    }
    Ok("1000 tables bitwise invariant; irrelevant sets recovered".into())
}

fn gradient_structure() -> Outcome {
    let mut r = rng(8);
    let mut scratch = vec![0.0; 64];
    let mut worst_fd: f64 = 0.0;
    let mut checked = 0;
    while checked < 10_000 {
        let n = 1 + checked % 5;
        let y = vec_in(&mut r, n, -6.0, 6.0);
        let theta = ParamTable::new(n, 1, vec_in(&mut r, 1 << n, -3.0, 3.0)).unwrap();
        let up = r.gen_range(0.5..2.0) * if r.gen() { 1.0 } else { -1.0 };
        // Tie-free: every directional slope is stable under halving the step.
        let f = |yv: &[f64], th: &ParamTable| up * nary_forward(yv, th).unwrap().0[0];
        let slope = |h: f64, i: usize, param: bool| {
            let (mut yp, mut ym, mut tp, mut tm) = (y.clone(), y.clone(), theta.clone(), theta.clone());
            if param {
                tp.entries_mut()[i] += h;
                tm.entries_mut()[i] -= h;
            } else {
                yp[i] += h;
                ym[i] -= h;
            }
            (f(&yp, &tp) - f(&ym, &tm)) / (2.0 * h)
        };
        let coords: Vec<(usize, bool)> = (0..n).map(|i| (i, false)).chain((0..1 << n).map(|j| (j, true))).collect();
        let fd: Vec<f64> = coords.iter().map(|&(i, p)| slope(1e-5, i, p)).collect();
        let stable = coords.iter().zip(&fd).all(|(&(i, p), a)| (a - slope(2.5e-6, i, p)).abs() <= 1e-7);
        if !stable {
            continue;
        }
        checked += 1;
        let (_, state) = nary_forward(&y, &theta).unwrap();
        let (gy, gt) = nary_backward(&state, &theta, &[up]).unwrap();
        if let Some(g) = gy.iter().find(|g| **g != 0.0 && g.abs() != up.abs()) {
            return Err(format!("antecedent gradient {g} with upstream {up}"));
        }
        let table = params_to_table(&theta).unwrap();
        let mut levels = vec![0.0; levels_len(n)];
        forward_channel(&y, table.row(0), &mut levels);
        let (mut by, mut ba) = (vec![0.0; n], vec![0.0; 1 << n]);
        backward_channel(&y, &levels, up, &mut by, &mut ba, &mut scratch);
        if ba.iter().filter(|g| **g != 0.0).count() > 1 {
            return Err("more than one nonzero table gradient".into());
        }
        for (k, &(i, p)) in coords.iter().enumerate() {
            let an = if p { gt.row(0)[i] } else { gy[i] };
            worst_fd = worst_fd.max((fd[k] - an).abs() / an.abs().max(1.0));
        }
    }
    if worst_fd > 1e-5 {
        return Err(format!("finite-difference rel. error {worst_fd:e}"));
    }
    Ok(format!("10000 inputs: magnitudes in {{0, upstream}}, single table gradient, rel. error {worst_fd:.1e}"))
}

fn attenuation() -> Outcome {
    let mut r = rng(9);
    let up = 0.75;
    let table = BeliefTable::new(4, 1, vec_in(&mut r, 16, -5.0, 5.0)).unwrap();
    let g = nary_backward_exact(&[0.0; 4], &table, &[up]).unwrap();
    let worst = g.table.iter().fold(0.0f64, |m, v| m.max((v - up / 16.0).abs()));
    let sum_err = (g.table.iter().sum::<f64>() - up).abs();
    if worst > 1e-9 || sum_err > 1e-9 {
        return Err(format!("exact entries off by {worst:e}, sum off by {sum_err:e}"));
    }
    let lsem_table: Vec<f64> = vec_in(&mut r, 16, 0.5, 5.0);
    let theta = table_to_params(&BeliefTable::new(4, 1, lsem_table).unwrap()).unwrap();
    let mut levels = vec![0.0; levels_len(4)];
    let a0 = params_to_table(&theta).unwrap();
    forward_channel(&[0.0; 4], a0.row(0), &mut levels);
    let (mut gy, mut ga, mut scratch) = (vec![0.0; 4], vec![0.0; 16], vec![0.0; 32]);
    backward_channel(&[0.0; 4], &levels, up, &mut gy, &mut ga, &mut scratch);
    let nonzero: Vec<f64> = ga.into_iter().filter(|v| *v != 0.0).collect();
    if nonzero.len() != 1 || (nonzero[0].abs() - up).abs() > 1e-12 {
        return Err(format!("LSEM table gradients {nonzero:?}"));
    }
    Ok(format!("exact entries = upstream/16 (err {worst:.1e}), sum err {sum_err:.1e}; LSEM passes one entry of magnitude {}", nonzero[0].abs()))
}

fn ail_recovery() -> Outcome {
    let start = Instant::now();
    let alpha = 100.0;
    let and_ail = |a: f64, b: f64| a.min(b).min(a + b);
    let or_ail = |a: f64, b: f64| a.max(b).max(a + b);
    let xnor_ail = |a: f64, b: f64| {
        let s = a * b;
        let sign = if s > 0.0 { 1.0 } else if s < 0.0 { -1.0 } else { 0.0 };
        sign * a.abs().min(b.abs())
    };
    let cases: [(&str, [f64; 4], &dyn Fn(f64, f64) -> f64); 3] = [
        ("and", [-1.0, -1.0, -1.0, 1.0], &and_ail),
        ("or", [-1.0, 1.0, 1.0, 1.0], &or_ail),
        ("xnor", [1.0, -1.0, -1.0, 1.0], &xnor_ail),
    ];
    let mut worst: f64 = 0.0;
    for (name, truth, f) in cases {
        let row: Vec<f64> = truth.iter().map(|v| alpha * v).collect();
        let theta = table_to_params(&BeliefTable::new(2, 1, row).unwrap()).unwrap();
        for a in 0..41 {
            for b in 0..41 {
                let y = [-10.0 + 0.5 * a as f64, -10.0 + 0.5 * b as f64];
                let z = nary_forward(&y, &theta).unwrap().0[0];
                let dev = (z - f(y[0], y[1])).abs();
                if dev > 1e-9 {
                    return Err(format!("{name} at {y:?}: {z} vs {}", f(y[0], y[1])));
                }
                worst = worst.max(dev);
            }
        }
    }
    within(start.elapsed(), 2.0)?;
    Ok(format!("and/or/xnor within {worst:.1e} on 41×41 grid"))
}

fn parameter_counts() -> Outcome {
    let expected = [1088, 2176, 3328, 4608];
    for (n, want) in (1..=4).zip(expected) {
        let got = LayerSpec::new(32, 32, Activation::Nary { arity: n }).unwrap().param_count();
        let formula = n * 32 * 32 + 32 * (1 << n);
        if got != want || formula != want {
            return Err(format!("n = {n}: {got} (formula {formula}), expected {want}"));
        }
    }
    Ok(format!("{expected:?}"))
}

const TRIALS: u64 = 12;

fn run_trial(gt: &GroundTruth, activation: Activation, seed: u64) -> (TrainReport, Dataset) {
    let data = synthesize(gt, 2000, 500, 500, seed).unwrap();
    let spec = NetworkSpec::sized(gt.n_inputs, &[gt.n_outputs], activation).unwrap();
    let config = TrainConfig { seed, l1_mode: L1Mode::Fixed { weight: 0.01 }, ..TrainConfig::default() };
    (train(&spec, &data, &config).unwrap(), data)
}

/// Run `TRIALS` seeded trials in parallel; returns (test accuracy at best epoch, metrics CSV).
fn trials(make_gt: impl Fn(u64) -> GroundTruth + Sync, activation: Activation) -> Vec<(f64, String)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (1..=TRIALS)
            .map(|seed| {
                let make_gt = &make_gt;
                s.spawn(move || {
                    let (report, _) = run_trial(&make_gt(seed), activation, seed);
                    (report.best().test.accuracy, report.metrics_csv())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len().is_multiple_of(2) {
        0.5 * (s[m - 1] + s[m])
    } else {
        s[m]
    }
}

/// Each output applies `table` to a seeded random choice of distinct inputs.
fn fixed_function(gamma: usize, table: &[bool], seed: u64) -> GroundTruth {
    let shape = generate_ground_truth(8, 8, gamma, seed).unwrap();
    let outputs = shape
        .outputs
        .into_iter()
        .map(|f| OutputFunction { antecedents: f.antecedents, table: table.to_vec() })
        .collect();
    GroundTruth::from_outputs(8, gamma, outputs).unwrap()
}

// c ? p : q with antecedents (c, p, q) at bits (1, 2, 3).
fn conditioned_disjunction(seed: u64) -> GroundTruth {
    let table: Vec<bool> = (0..8).map(|v| if v & 1 == 1 { v & 2 != 0 } else { v & 4 != 0 }).collect();
    fixed_function(3, &table, seed)
}

fn learning(csvs: &mut Vec<String>) -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for gamma in 2..=4 {
        let results = trials(|seed| generate_ground_truth(8, 8, gamma, seed).unwrap(), Activation::Nary { arity: gamma });
        let acc: Vec<f64> = results.iter().map(|r| r.0).collect();
        csvs.extend(results.into_iter().map(|r| r.1));
        let med = median(&acc);
        let good = acc.iter().filter(|a| **a >= 0.95).count();
        summary.push(format!("γ={gamma} median {med:.4} ({good}/12 ≥ 0.95)"));
        if med < 0.99 || good < 10 {
            failures.push(format!("γ={gamma} accuracies {acc:?}"));
        }
    }
    let xor = trials(|seed| fixed_function(2, &[false, true, true, false], seed), Activation::Nary { arity: 2 });
    let xor_best = xor.iter().map(|r| r.0).fold(0.0, f64::max);
    let xor_perfect = xor.iter().filter(|r| r.0 == 1.0).count();
    let cd = trials(conditioned_disjunction, Activation::Nary { arity: 3 });
    let cd_perfect = cd.iter().filter(|r| r.0 == 1.0).count();
    let relu = trials(|seed| fixed_function(2, &[false, true, true, false], seed), Activation::Relu);
    let relu_worst = relu.iter().map(|r| r.0).fold(0.0, f64::max);
    csvs.extend(xor.into_iter().chain(cd).chain(relu).map(|r| r.1));
    summary.push(format!("xor 1.0 in {xor_perfect}/12, cond. disjunction 1.0 in {cd_perfect}/12, relu-xor max {relu_worst:.3}"));
    if xor_perfect == 0 || xor_best < 1.0 {
        failures.push("xor never reached 1.0".into());
    }
    if cd_perfect == 0 {
        failures.push("conditioned disjunction never reached 1.0".into());
    }
    if relu_worst >= 0.9 {
        failures.push(format!("relu reached {relu_worst} on xor"));
    }
    if let Err(e) = within(start.elapsed(), 300.0) {
        failures.push(e);
    }
    if failures.is_empty() {
        Ok(summary.join("; "))
    } else {
        Err(format!("{}; {}", summary.join("; "), failures.join("; ")))
    }
}

fn determinism(first: &[String]) -> Outcome {
    let mut again = Vec::new();
    learning(&mut again).ok();
    if first.is_empty() || again != first {
        return Err(format!("{} of {} metrics files differ", first.iter().zip(&again).filter(|(a, b)| a != b).count(), first.len()));
    }
    Ok(format!("{} metrics CSVs identical across repeated runs", first.len()))
}

fn main() -> ExitCode {
    let mut csvs = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("composition count", Box::new(composition_count)),
        ("binary operation catalog", Box::new(catalog_rows)),
        ("basis properties", Box::new(basis_properties)),
        ("LSEM bound", Box::new(lsem_bound)),
        ("unary two-max identity", Box::new(unary_identity)),
        ("saturation", Box::new(saturation)),
        ("irrelevance invariance", Box::new(irrelevance)),
        ("gradient structure", Box::new(gradient_structure)),
        ("attenuation contrast", Box::new(attenuation)),
        ("AIL recovery", Box::new(ail_recovery)),
        ("parameter counts", Box::new(parameter_counts)),
        ("desk-scale learning", Box::new(|| learning(&mut csvs))),
    ];
    let mut failed = 0;
    let mut report = |idx: usize, name: &str, outcome: Outcome, elapsed: Duration| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {idx:>2} {tag} {name} [{:.2} s]: {detail}", elapsed.as_secs_f64());
    };
    for (idx, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        report(idx + 1, name, outcome, start.elapsed());
    }
    let start = Instant::now();
    let outcome = determinism(&csvs);
    report(13, "determinism", outcome, start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
