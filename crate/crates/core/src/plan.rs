//! Column preprocessing shared by the blocked kernels.
//!
//! The load of output column `j` is `Op_j = Σ_{k : B_kj ≠ 0} nnz(A[:, k])`,
//! the number of scalar multiplications it needs. Columns are sorted by
//! decreasing load, split into blocks whose lanes have (mostly) equal load,
//! and optionally assigned a per-block hash table size.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

/// Hybrid switch point: sorted columns with `Op_j >= t` go through SPA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Finite(usize),
    Infinite,
}

impl Threshold {
    /// True when a column with this load is processed by SPA.
    #[inline]
    pub fn routes_to_spa(self, op: usize) -> bool {
        match self {
            Threshold::Finite(t) => op >= t,
            Threshold::Infinite => false,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(t) => write!(f, "{t}"),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Threshold::Infinite),
            other => other
                .parse()
                .map(Threshold::Finite)
                .map_err(|_| Error::input(format!("invalid threshold '{s}'"))),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::Finite(t) => s.serialize_u64(*t as u64),
            Threshold::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(usize),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(n) => Ok(Threshold::Finite(n)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `Op_j` for every column of `B`.
pub fn compute_ops<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>) -> Result<Vec<usize>> {
    if a.ncols() != b.nrows() {
        return Err(Error::input(format!(
            "dimension mismatch: A has {} columns, B has {} rows",
            a.ncols(),
            b.nrows()
        )));
    }
    Ok((0..b.ncols())
        .map(|j| b.col(j).0.iter().map(|&k| a.col_nnz(k)).sum())
        .collect())
}

/// Stable descending sort; returns the permutation and the number of
/// comparisons the sort made.
pub fn sort_columns_counted(ops: &[usize]) -> (Vec<usize>, u64) {
    let mut perm: Vec<usize> = (0..ops.len()).collect();
    let mut comparisons = 0u64;
    perm.sort_by(|&x, &y| {
        comparisons += 1;
        ops[y].cmp(&ops[x])
    });
    (perm, comparisons)
}

/// Permutation listing columns by decreasing load, ties in original order.
pub fn sort_columns(ops: &[usize]) -> Vec<usize> {
    sort_columns_counted(ops).0
}

/// Split sorted loads into blocks.
///
/// Each block starts with `b_min` columns (fewer at the end) and grows while
/// the next column has the same load as the block's first column, up to
/// `b_max` columns.
pub fn plan_blocks(
    sorted_ops: &[usize],
    b_min: usize,
    b_max: usize,
    max_vl: usize,
) -> Result<Vec<Range<usize>>> {
    if !(1 <= b_min && b_min <= b_max && b_max <= max_vl) {
        return Err(Error::input(format!(
            "block sizes must satisfy 1 <= b_min <= b_max <= max_vl \
             (b_min = {b_min}, b_max = {b_max}, max_vl = {max_vl})"
        )));
    }
    let n = sorted_ops.len();
    let mut blocks = Vec::with_capacity(n.div_ceil(b_min));
    let mut start = 0;
    while start < n {
        let first = sorted_ops[start];
        let mut end = (start + b_min).min(n);
        while end < n && end - start < b_max && sorted_ops[end] == first {
            end += 1;
        }
        blocks.push(start..end);
        start = end;
    }
    Ok(blocks)
}

/// Smallest power of two strictly greater than `x`.
#[inline]
pub fn pow2_above(x: usize) -> usize {
    (x + 1).next_power_of_two()
}

/// Per-block hash table size.
///
/// The first block gets the power of two `H` with `H/2 <= maxOp < H`; later
/// blocks shrink `H` while their maximum load stays below `H/2`. `H` never
/// grows, so loads must be sorted in decreasing order.
pub fn hash_size_schedule(sorted_ops: &[usize], blocks: &[Range<usize>]) -> Result<Vec<usize>> {
    let mut sizes = Vec::with_capacity(blocks.len());
    let mut h = usize::MAX;
    for block in blocks {
        let max_op = sorted_ops[block.clone()].iter().copied().max().unwrap_or(0);
        let want = pow2_above(max_op);
        if want > h {
            return Err(Error::input(format!(
                "block {block:?} needs a table of {want} but the previous block used {h}; \
                 loads must be sorted in decreasing order"
            )));
        }
        h = want;
        sizes.push(h);
    }
    Ok(sizes)
}

/// Index of the first sorted column with load below `t`.
pub fn hybrid_split(sorted_ops: &[usize], t: Threshold) -> usize {
    sorted_ops.partition_point(|&op| t.routes_to_spa(op))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub b_min: usize,
    pub b_max: usize,
    pub max_vl: usize,
    pub threshold: Threshold,
    /// Also compute the per-block hash table sizes.
    pub hash_sizes: bool,
}

impl PlanConfig {
    /// Fixed block size `b` with no SPA prefix.
    pub fn blocked(b_min: usize, b_max: usize) -> Self {
        PlanConfig {
            b_min,
            b_max,
            max_vl: crate::machine::DEFAULT_MAX_VL,
            threshold: Threshold::Infinite,
            hash_sizes: true,
        }
    }

    pub fn with_threshold(mut self, t: Threshold) -> Self {
        self.threshold = t;
        self
    }

    pub fn with_max_vl(mut self, max_vl: usize) -> Self {
        self.max_vl = max_vl;
        self
    }
}

/// Everything the blocked kernels need to know about `B` before running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnPlan {
    pub config: PlanConfig,
    /// `Op_j` in original column order.
    pub ops: Vec<usize>,
    /// `perm[i]` is the original index of the `i`-th sorted column.
    pub perm: Vec<usize>,
    /// Half-open ranges over sorted positions `[hybrid_split, ncols)`.
    pub blocks: Vec<Range<usize>>,
    pub hash_sizes: Option<Vec<usize>>,
    /// Sorted positions below this go through SPA.
    pub hybrid_split: usize,
    /// Scalar steps spent building the plan: one per non-zero of `B` for the
    /// loads, one per sort comparison, one per column for blocking.
    pub scalar_work: u64,
}

impl ColumnPlan {
    pub fn build<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>, config: PlanConfig) -> Result<Self> {
        let ops = compute_ops(a, b)?;
        let (perm, comparisons) = sort_columns_counted(&ops);
        let sorted: Vec<usize> = perm.iter().map(|&j| ops[j]).collect();
        let split = hybrid_split(&sorted, config.threshold);
        let blocks: Vec<Range<usize>> =
            plan_blocks(&sorted[split..], config.b_min, config.b_max, config.max_vl)?
                .into_iter()
                .map(|r| r.start + split..r.end + split)
                .collect();
        let hash_sizes = if config.hash_sizes {
            Some(hash_size_schedule(&sorted, &blocks)?)
        } else {
            None
        };
        let scalar_work = b.nnz() as u64 + comparisons + (sorted.len() - split) as u64;
        Ok(ColumnPlan {
            config,
            ops,
            perm,
            blocks,
            hash_sizes,
            hybrid_split: split,
            scalar_work,
        })
    }

    pub fn sorted_ops(&self) -> Vec<usize> {
        self.perm.iter().map(|&j| self.ops[j]).collect()
    }

    pub fn ncols(&self) -> usize {
        self.ops.len()
    }

    pub fn total_ops(&self) -> u64 {
        self.ops.iter().map(|&x| x as u64).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
