//! Belief tables, sparse parameter tables, and the sign basis between them.
//!
//! Column `j` of a table addresses the antecedent vertex whose `i`-th antecedent
//! is `bit_{i}(j)`, with antecedent 1 on the least-significant bit. Parameters
//! `Θ` produce table logits `A = Θ B` where
//!
//! ```text
//! B[l][j] = Π_i f(bit_i(l), bit_i(j)),   f(1, 0) = -1, otherwise f = 1.
//! ```
//!
//! Parameter `l` with `bit_i(l) = 1` has an antisymmetric effect on antecedent
//! `i`. Zeroing all of them makes the table blind to that antecedent, and only
//! then (see [`irrelevant_antecedents`]).

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest arity for which [`build_basis`] materializes a matrix.
pub const MAX_BASIS_ARITY: usize = 12;

/// Bases up to this arity are cached densely; larger ones use the butterfly transform.
const DENSE_ARITY: usize = 6;

/// Default magnitude below which a parameter counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Serialized column-order tag. Bit 1 of the column index is antecedent 1.
pub const LAYOUT_TAG: &str = "bit1-lsb";

/// The `2^n × 2^n` sign matrix `B` linking parameters to belief tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisMatrix {
    arity: usize,
    entries: Vec<i8>,
}

impl BasisMatrix {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        1 << self.arity
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.size() + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        let n = self.size();
        &self.entries[row * n..(row + 1) * n]
    }

    /// `B Bᵀ` in exact integer arithmetic.
    pub fn gram(&self) -> Vec<i64> {
        let n = self.size();
        let mut out = vec![0i64; n * n];
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = self
                    .row(r)
                    .iter()
                    .zip(self.row(c))
                    .map(|(&a, &b)| i64::from(a) * i64::from(b))
                    .sum();
            }
        }
        out
    }
}

#[inline]
fn basis_sign(row: usize, col: usize) -> i8 {
    // f(1, 0) = -1 on every bit where the row has a 1 and the column a 0.
    if (row & !col).count_ones() % 2 == 1 {
        -1
    } else {
        1
    }
}

/// Materialize the basis for arity `n` (1 ≤ n ≤ 12).
pub fn build_basis(n: usize) -> Result<BasisMatrix> {
    if !(1..=MAX_BASIS_ARITY).contains(&n) {
        return Err(invalid(format!("basis arity must lie in 1..={MAX_BASIS_ARITY}, got {n}")));
    }
    let size = 1usize << n;
    let mut entries = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            entries.push(basis_sign(r, c));
        }
    }
    Ok(BasisMatrix { arity: n, entries })
}

fn dense_basis(n: usize) -> &'static [f64] {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=DENSE_ARITY)
            .map(|k| {
                let size = 1usize << k;
                (0..size * size)
                    .map(|idx| f64::from(basis_sign(idx / size, idx % size)))
                    .collect()
            })
            .collect()
    });
    &cache[n]
}

/// Arity implied by a row length, which must be a power of two ≥ 2.
pub fn arity_of_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(invalid(format!("table row length {len} is not 2^n with n ≥ 1")));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_BASIS_ARITY {
        return Err(invalid(format!("arity {n} exceeds {MAX_BASIS_ARITY}")));
    }
    Ok(n)
}

/// `a = θ B` for one channel.
pub fn params_row_to_table(theta: &[f64], out: &mut [f64]) {
    let len = theta.len();
    debug_assert_eq!(len, out.len());
    let n = len.trailing_zeros() as usize;
    if n <= DENSE_ARITY {
        let b = dense_basis(n);
        out.fill(0.0);
        for (l, &t) in theta.iter().enumerate() {
            let brow = &b[l * len..(l + 1) * len];
            for (o, &s) in out.iter_mut().zip(brow) {
                *o += t * s;
            }
        }
    } else {
        out.copy_from_slice(theta);
        butterfly_basis(out);
    }
}

/// `g Bᵀ` for one channel: maps table-space gradients onto parameters.
pub fn table_row_grad_to_params(grad: &[f64], out: &mut [f64]) {
    let len = grad.len();
    debug_assert_eq!(len, out.len());
    let n = len.trailing_zeros() as usize;
    if n <= DENSE_ARITY {
        let b = dense_basis(n);
        for (l, o) in out.iter_mut().enumerate() {
            let brow = &b[l * len..(l + 1) * len];
            *o = grad.iter().zip(brow).map(|(g, s)| g * s).sum();
        }
    } else {
        out.copy_from_slice(grad);
        butterfly_basis_transpose(out);
    }
}

/// `θ = a Bᵀ / 2^n` for one channel.
pub fn table_row_to_params(table: &[f64], out: &mut [f64]) {
    table_row_grad_to_params(table, out);
    let scale = 1.0 / table.len() as f64;
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// In-place `x ← x B` using `n` butterfly passes.
pub fn butterfly_basis(x: &mut [f64]) {
    let mut half = 1;
    while half < x.len() {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*u, *v);
                *u = a - b;
                *v = a + b;
            }
        }
        half *= 2;
    }
}

/// In-place `x ← x Bᵀ` using `n` butterfly passes.
pub fn butterfly_basis_transpose(x: &mut [f64]) {
    let mut half = 1;
    while half < x.len() {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*u, *v);
                *u = a + b;
                *v = b - a;
            }
        }
        half *= 2;
    }
}

macro_rules! table_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "TableJson", into = "TableJson")]
        pub struct $name {
            arity: usize,
            channels: usize,
            entries: Vec<f64>,
        }

        impl $name {
            pub fn new(arity: usize, channels: usize, entries: Vec<f64>) -> Result<Self> {
                if !(1..=MAX_BASIS_ARITY).contains(&arity) {
                    return Err(invalid(format!(
                        "arity must lie in 1..={MAX_BASIS_ARITY}, got {arity}"
                    )));
                }
                let expected = channels << arity;
                if entries.len() != expected {
                    return Err(invalid(format!(
                        "{} with {channels} channels of arity {arity} needs {expected} entries, got {}",
                        stringify!($name),
                        entries.len()
                    )));
                }
                if entries.iter().any(|v| !v.is_finite()) {
                    return Err(invalid(concat!(stringify!($name), " entries must be finite")));
                }
                Ok(Self { arity, channels, entries })
            }

            pub fn zeros(arity: usize, channels: usize) -> Result<Self> {
                Self::new(arity, channels, vec![0.0; channels << arity])
            }

            /// Build from one row per channel; the arity is taken from the row length.
            pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
                let first = rows
                    .first()
                    .ok_or_else(|| invalid("table needs at least one channel"))?;
                let width = first.as_ref().len();
                let arity = arity_of_len(width)?;
                let mut entries = Vec::with_capacity(rows.len() * width);
                for r in rows {
                    let r = r.as_ref();
                    if r.len() != width {
                        return Err(invalid(format!(
                            "ragged table rows: {} vs {width}",
                            r.len()
                        )));
                    }
                    entries.extend_from_slice(r);
                }
                Self::new(arity, rows.len(), entries)
            }

            pub fn arity(&self) -> usize {
                self.arity
            }

            pub fn channels(&self) -> usize {
                self.channels
            }

            /// Entries per channel, `2^arity`.
            pub fn width(&self) -> usize {
                1 << self.arity
            }

            pub fn row(&self, k: usize) -> &[f64] {
                let w = self.width();
                &self.entries[k * w..(k + 1) * w]
            }

            pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
                let w = self.width();
                &mut self.entries[k * w..(k + 1) * w]
            }

            pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
                self.entries.chunks_exact(self.width())
            }

            pub fn entries(&self) -> &[f64] {
                &self.entries
            }

            pub fn entries_mut(&mut self) -> &mut [f64] {
                &mut self.entries
            }
        }

        impl TryFrom<TableJson> for $name {
            type Error = Error;

            fn try_from(j: TableJson) -> Result<Self> {
                if j.layout != LAYOUT_TAG {
                    return Err(Error::Parse(format!(
                        "unsupported table layout {:?}, expected {LAYOUT_TAG:?}",
                        j.layout
                    )));
                }
                if j.entries.len() != j.channels {
                    return Err(Error::Parse(format!(
                        "table declares {} channels but has {} rows",
                        j.channels,
                        j.entries.len()
                    )));
                }
                let t = Self::new(j.arity, j.channels, j.entries.concat())?;
                Ok(t)
            }
        }

        impl From<$name> for TableJson {
            fn from(t: $name) -> TableJson {
                TableJson {
                    arity: t.arity,
                    channels: t.channels,
                    layout: LAYOUT_TAG.to_string(),
                    entries: t.rows().map(<[f64]>::to_vec).collect(),
                }
            }
        }
    };
}

/// On-disk form shared by belief and parameter tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub arity: usize,
    pub channels: usize,
    pub layout: String,
    pub entries: Vec<Vec<f64>>,
}

table_type!(
    /// Per-channel conditional consequent logits, `channels × 2^arity`.
    BeliefTable
);

table_type!(
    /// Per-channel activation parameters in the sign basis, `channels × 2^arity`.
    ParamTable
);

/// `A = Θ B`, row by row.
pub fn params_to_table(theta: &ParamTable) -> Result<BeliefTable> {
    let mut entries = vec![0.0; theta.entries.len()];
    for (src, dst) in theta.rows().zip(entries.chunks_exact_mut(theta.width())) {
        params_row_to_table(src, dst);
    }
    BeliefTable::new(theta.arity, theta.channels, entries)
}

/// `Θ = A Bᵀ / 2^n`, row by row.
pub fn table_to_params(table: &BeliefTable) -> Result<ParamTable> {
    let mut entries = vec![0.0; table.entries.len()];
    for (src, dst) in table.rows().zip(entries.chunks_exact_mut(table.width())) {
        table_row_to_params(src, dst);
    }
    ParamTable::new(table.arity, table.channels, entries)
}

/// Antecedents (1-based) whose antisymmetric parameters are all within `tol` of zero.
///
/// Each returned antecedent is irrelevant to the belief function, so the row has
/// at most `2^(n - |result|)` nonzero parameters.
pub fn irrelevant_antecedents(theta_row: &[f64], tol: f64) -> Result<BTreeSet<usize>> {
    if tol.is_nan() || tol < 0.0 {
        return Err(invalid(format!("tolerance must be non-negative, got {tol}")));
    }
    let n = arity_of_len(theta_row.len())?;
    Ok((0..n)
        .filter(|&i| {
            theta_row
                .iter()
                .enumerate()
                .all(|(j, t)| (j >> i) & 1 == 0 || t.abs() <= tol)
        })
        .map(|i| i + 1)
        .collect())
}

/// Parameters with magnitude above `tol`.
pub fn nonzero_count(theta_row: &[f64], tol: f64) -> usize {
    theta_row.iter().filter(|t| t.abs() > tol).count()
}

/// Antecedents (1-based) whose flip never changes any table entry by more than `tol`.
pub fn table_irrelevant_antecedents(table_row: &[f64], tol: f64) -> Result<BTreeSet<usize>> {
    let n = arity_of_len(table_row.len())?;
    Ok((0..n)
        .filter(|&i| {
            table_row
                .iter()
                .enumerate()
                .all(|(j, &a)| (a - table_row[j ^ (1 << i)]).abs() <= tol)
        })
        .map(|i| i + 1)
        .collect())
}

fn check_injective(map: &[usize], target: usize) -> Result<()> {
    let mut seen = vec![false; target];
    for &p in map {
        if p == 0 || p > target {
            return Err(invalid(format!("antecedent position {p} outside 1..={target}")));
        }
        if std::mem::replace(&mut seen[p - 1], true) {
            return Err(invalid(format!("antecedent position {p} used twice")));
        }
    }
    Ok(())
}

/// Relocate bit `i` of `index` to bit `map[i] - 1`.
#[inline]
fn remap_index(index: usize, map: &[usize]) -> usize {
    map.iter()
        .enumerate()
        .filter(|(i, _)| (index >> i) & 1 == 1)
        .fold(0, |acc, (_, &p)| acc | 1 << (p - 1))
}

/// Express an arity-`m` parameter table at arity `target_arity`.
///
/// `argument_map[i]` is the 1-based target position of source antecedent `i + 1`.
/// Unmapped target antecedents receive only zero antisymmetric parameters and are
/// therefore ignored by the embedded function.
pub fn embed(theta: &ParamTable, target_arity: usize, argument_map: &[usize]) -> Result<ParamTable> {
    let m = theta.arity;
    if m > target_arity {
        return Err(invalid(format!("cannot embed arity {m} into arity {target_arity}")));
    }
    if argument_map.len() != m {
        return Err(invalid(format!(
            "argument map has {} entries for arity {m}",
            argument_map.len()
        )));
    }
    check_injective(argument_map, target_arity)?;
    let mut out = ParamTable::zeros(target_arity, theta.channels)?;
    for k in 0..theta.channels {
        let src = theta.row(k);
        let dst = out.row_mut(k);
        for (l, &v) in src.iter().enumerate() {
            dst[remap_index(l, argument_map)] = v;
        }
    }
    Ok(out)
}

fn permute_row(row: &[f64], perm: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; row.len()];
    for (j, &v) in row.iter().enumerate() {
        out[remap_index(j, perm)] = v;
    }
    out
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(invalid(format!("permutation has {} entries for arity {n}", perm.len())));
    }
    check_injective(perm, n)
}

/// Reorder antecedents: antecedent `i` (1-based) moves to position `perm[i - 1]`.
pub fn permute_antecedents(table: &BeliefTable, perm: &[usize]) -> Result<BeliefTable> {
    check_permutation(perm, table.arity)?;
    let rows: Vec<Vec<f64>> = table.rows().map(|r| permute_row(r, perm)).collect();
    BeliefTable::from_rows(&rows)
}

/// The same reordering applied to parameters. The basis is invariant under it.
pub fn permute_params(theta: &ParamTable, perm: &[usize]) -> Result<ParamTable> {
    check_permutation(perm, theta.arity)?;
    let rows: Vec<Vec<f64>> = theta.rows().map(|r| permute_row(r, perm)).collect();
    ParamTable::from_rows(&rows)
}

/// A named binary belief function with its table logits and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub table: [f64; 4],
    pub params: [f64; 4],
}

const H: f64 = 0.5;

const CATALOG: [CatalogEntry; 12] = [
    CatalogEntry { name: "true", table: [1.0, 1.0, 1.0, 1.0], params: [1.0, 0.0, 0.0, 0.0] },
    CatalogEntry { name: "arg_1", table: [-1.0, 1.0, -1.0, 1.0], params: [0.0, 1.0, 0.0, 0.0] },
    CatalogEntry { name: "not_2", table: [1.0, 1.0, -1.0, -1.0], params: [0.0, 0.0, -1.0, 0.0] },
    CatalogEntry { name: "xor", table: [-1.0, 1.0, 1.0, -1.0], params: [0.0, 0.0, 0.0, -1.0] },
    CatalogEntry { name: "relu_1", table: [0.0, 1.0, 0.0, 1.0], params: [H, H, 0.0, 0.0] },
    CatalogEntry { name: "relu_not2", table: [1.0, 1.0, 0.0, 0.0], params: [H, 0.0, -H, 0.0] },
    CatalogEntry { name: "relu_xor", table: [0.0, 1.0, 1.0, 0.0], params: [H, 0.0, 0.0, -H] },
    CatalogEntry { name: "imply", table: [1.0, -1.0, 1.0, 1.0], params: [H, -H, H, H] },
    CatalogEntry { name: "imply*", table: [0.0, -1.0, 0.0, 1.0], params: [0.0, 0.0, H, H] },
    CatalogEntry { name: "and", table: [-1.0, -1.0, -1.0, 1.0], params: [-H, H, H, H] },
    CatalogEntry { name: "or", table: [-1.0, 1.0, 1.0, 1.0], params: [H, H, H, -H] },
    CatalogEntry { name: "and*", table: [-1.0, 0.0, 0.0, 1.0], params: [0.0, H, H, 0.0] },
];

/// The twelve reference binary operations, in table order.
pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

/// Look up a catalog row by name (`relu_¬2` is accepted for `relu_not2`).
pub fn catalog_entry(name: &str) -> Option<&'static CatalogEntry> {
    let name = if name == "relu_¬2" { "relu_not2" } else { name };
    CATALOG.iter().find(|e| e.name == name)
}

impl CatalogEntry {
    pub fn belief_table(&self, scale: f64) -> BeliefTable {
        let row: Vec<f64> = self.table.iter().map(|v| v * scale).collect();
        BeliefTable::from_rows(&[row]).expect("catalog rows are well formed")
    }

    pub fn param_table(&self, scale: f64) -> ParamTable {
        let row: Vec<f64> = self.params.iter().map(|v| v * scale).collect();
        ParamTable::from_rows(&[row]).expect("catalog rows are well formed")
    }
}
