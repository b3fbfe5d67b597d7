//! Expand, sort, compress: materialise every partial product as a
//! `(row, col, value)` triplet, radix-sort by `(col, row)`, then sum runs of
//! equal keys.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_dims, KernelOutput};
use crate::machine::{Cmp, IndexOp, Operand, VecEngine, VecMask};
use crate::plan::compute_ops;
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

/// Default for [`EscParams::group_threshold`].
pub const DEFAULT_GROUP_THRESHOLD: usize = 10_000;

/// Bits per radix-sort pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadixPolicy {
    /// 5 or 6 bits, whichever needs fewer passes for the key range.
    #[default]
    Auto,
    Fixed(u32),
}

impl RadixPolicy {
    /// Digit width for keys in `0..key_count`.
    pub fn radix_for(self, key_count: usize) -> u32 {
        match self {
            RadixPolicy::Auto => choose_radix(key_count),
            RadixPolicy::Fixed(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscParams {
    /// A group of consecutive columns closes once its total `Op` reaches
    /// this value.
    pub group_threshold: usize,
    pub radix: RadixPolicy,
}

impl Default for EscParams {
    fn default() -> Self {
        EscParams {
            group_threshold: DEFAULT_GROUP_THRESHOLD,
            radix: RadixPolicy::Auto,
        }
    }
}

/// `⌈log2 n⌉`, the bits needed for keys in `0..n`.
pub fn key_bits(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub fn radix_rounds(bits: u32, radix: u32) -> u32 {
    bits.div_ceil(radix)
}

/// 6 bits only when that saves a pass over 5.
pub fn choose_radix(key_count: usize) -> u32 {
    let bits = key_bits(key_count);
    if radix_rounds(bits, 6) < radix_rounds(bits, 5) {
        6
    } else {
        5
    }
}

/// Greedy grouping of consecutive columns: a group closes as soon as its
/// summed `Op` reaches `threshold`.
pub fn esc_groups(ops: &[usize], threshold: usize) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut sum = 0;
    for (j, &op) in ops.iter().enumerate() {
        sum += op;
        if sum >= threshold {
            groups.push(start..j + 1);
            start = j + 1;
            sum = 0;
        }
    }
    if start < ops.len() {
        groups.push(start..ops.len());
    }
    groups
}

/// Parallel triplet arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EscTriplets<T> {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> EscTriplets<T> {
    fn zeroed(k: usize) -> Self {
        EscTriplets {
            rows: vec![0; k],
            cols: vec![0; k],
            values: vec![T::zero(); k],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Non-decreasing in `(col, row)`.
    pub fn is_sorted(&self) -> bool {
        (1..self.len())
            .all(|i| (self.cols[i - 1], self.rows[i - 1]) <= (self.cols[i], self.rows[i]))
    }
}

/// Every partial product `a_ik·b_kj` for `j` in `cols`. One loop trip per
/// non-zero of `B`.
pub fn esc_expand<T: Scalar>(
    e: &mut VecEngine,
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    cols: Range<usize>,
) -> Result<EscTriplets<T>> {
    check_dims(a, b)?;
    let k: usize = cols
        .clone()
        .flat_map(|j| b.col(j).0.iter().map(|&r| a.col_nnz(r)))
        .sum();
    let mut out = EscTriplets::zeroed(k);
    let mut pos = 0;
    for j in cols {
        let (b_rows, b_vals) = b.col(j);
        for (&kk, &bkj) in b_rows.iter().zip(b_vals) {
            e.count_iteration();
            let end = a.column_pointers()[kk + 1];
            let mut off = a.column_pointers()[kk];
            while off < end {
                let vl = e.set_vl(end - off);
                let full = VecMask::full(vl);
                let va = e.load(a.values(), off)?;
                let rows = e.load(a.row_indices(), off)?;
                let prod = e.mul(&va, Operand::Scalar(bkj), &full)?;
                e.store(&prod, &mut out.values, pos)?;
                e.store(&rows, &mut out.rows, pos)?;
                let col = e.broadcast(j);
                e.store(&col, &mut out.cols, pos)?;
                pos += vl;
                off += vl;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Key {
    Row,
    Col,
}

/// Virtual processor `p` of `P = VL` owns elements `p·chunk ..`.
struct Partition {
    procs: usize,
    chunk: usize,
}

impl Partition {
    fn new(e: &mut VecEngine, k: usize) -> Self {
        let procs = e.set_vl(k.min(e.max_vl()));
        Partition {
            procs,
            chunk: k.div_ceil(procs),
        }
    }
}

/// One stable counting-sort pass on `radix` bits of `key` starting at
/// `shift`.
fn radix_pass<T: Scalar>(
    e: &mut VecEngine,
    t: &EscTriplets<T>,
    key: Key,
    shift: usize,
    radix: u32,
) -> Result<EscTriplets<T>> {
    let k = t.len();
    let part = Partition::new(e, k);
    let procs = part.procs;
    let buckets = 1usize << radix;
    let full = VecMask::full(procs);
    let keys = match key {
        Key::Row => &t.rows,
        Key::Col => &t.cols,
    };

    // hist[digit·P + p]
    let mut hist = vec![0usize; buckets * procs];
    let zero = e.broadcast(0usize);
    for d in 0..buckets {
        e.store(&zero, &mut hist, d * procs)?;
    }
    let lane = e.iota();
    let base = e.index_op(&lane, IndexOp::Mul, Operand::Scalar(part.chunk), &full)?;

    let digit_slot = |e: &mut VecEngine, s: usize| -> Result<_> {
        let pos = e.index_op(&base, IndexOp::Add, Operand::Scalar(s), &full)?;
        let valid = e.compare(&pos, Cmp::Lt, Operand::Scalar(k), &full)?;
        let kv = e.gather(keys, &pos, &valid)?;
        let d = e.index_op(&kv, IndexOp::Shr, Operand::Scalar(shift), &valid)?;
        let d = e.index_op(&d, IndexOp::And, Operand::Scalar(buckets - 1), &valid)?;
        let slot = e.index_op(&d, IndexOp::Mul, Operand::Scalar(procs), &valid)?;
        let slot = e.index_op(&slot, IndexOp::Add, Operand::Reg(&lane), &valid)?;
        Ok((pos, valid, slot))
    };

    for s in 0..part.chunk {
        e.count_iteration();
        let (_, valid, slot) = digit_slot(e, s)?;
        let c = e.gather(&hist, &slot, &valid)?;
        let c = e.index_op(&c, IndexOp::Add, Operand::Scalar(1), &valid)?;
        e.scatter(&mut hist, &slot, &c, &valid)?;
    }

    let mut carry = 0;
    for d in 0..buckets {
        let h = e.load(&hist, d * procs)?;
        let (scanned, total) = e.scan_exclusive(&h, carry)?;
        e.store(&scanned, &mut hist, d * procs)?;
        carry = total;
    }

    let mut out = EscTriplets::zeroed(k);
    for s in 0..part.chunk {
        e.count_iteration();
        let (pos, valid, slot) = digit_slot(e, s)?;
        let dst = e.gather(&hist, &slot, &valid)?;
        let rows = e.gather(&t.rows, &pos, &valid)?;
        let cols = e.gather(&t.cols, &pos, &valid)?;
        let vals = e.gather(&t.values, &pos, &valid)?;
        e.scatter(&mut out.rows, &dst, &rows, &valid)?;
        e.scatter(&mut out.cols, &dst, &cols, &valid)?;
        e.scatter(&mut out.values, &dst, &vals, &valid)?;
        let next = e.index_op(&dst, IndexOp::Add, Operand::Scalar(1), &valid)?;
        e.scatter(&mut hist, &slot, &next, &valid)?;
    }
    Ok(out)
}

/// Stable LSD radix sort by `(col, row)`; row keys lie in `0..nrows`,
/// column keys in `0..ncols`.
pub fn esc_radix_sort<T: Scalar>(
    e: &mut VecEngine,
    t: EscTriplets<T>,
    nrows: usize,
    ncols: usize,
    policy: RadixPolicy,
) -> Result<EscTriplets<T>> {
    let mut t = t;
    if t.len() <= 1 {
        return Ok(t);
    }
    for (key, range) in [(Key::Row, nrows), (Key::Col, ncols)] {
        let radix = policy.radix_for(range);
        if radix == 0 || radix > 16 {
            return Err(Error::input(format!("radix width {radix} outside 1..=16")));
        }
        let bits = key_bits(range);
        for round in 0..radix_rounds(bits, radix) {
            t = radix_pass(e, &t, key, (round * radix) as usize, radix)?;
        }
    }
    Ok(t)
}

/// Sum runs of equal `(col, row)` in sorted triplets.
pub fn esc_compress<T: Scalar>(e: &mut VecEngine, t: &EscTriplets<T>) -> Result<EscTriplets<T>> {
    let k = t.len();
    if k == 0 {
        return Ok(EscTriplets::default());
    }
    let part = Partition::new(e, k);
    let procs = part.procs;
    let full = VecMask::full(procs);
    let lane = e.iota();
    let base = e.index_op(&lane, IndexOp::Mul, Operand::Scalar(part.chunk), &full)?;

    // Each processor merges its own segment in place of `runs`.
    let mut runs = EscTriplets::zeroed(k);
    let mut count = e.broadcast(0usize);
    let mut cur_row = e.broadcast(0usize);
    let mut cur_col = e.broadcast(0usize);
    let mut cur_val = e.broadcast(T::zero());
    let mut open = VecMask::none(procs);

    let flush = |e: &mut VecEngine,
                     runs: &mut EscTriplets<T>,
                     count: &mut _,
                     which: &VecMask,
                     row: &_,
                     col: &_,
                     val: &_|
     -> Result<()> {
        let slot = e.index_op(&base, IndexOp::Add, Operand::Reg(count), which)?;
        e.scatter(&mut runs.rows, &slot, row, which)?;
        e.scatter(&mut runs.cols, &slot, col, which)?;
        e.scatter(&mut runs.values, &slot, val, which)?;
        *count = e.index_op(count, IndexOp::Add, Operand::Scalar(1), which)?;
        Ok(())
    };

    for s in 0..part.chunk {
        e.count_iteration();
        let pos = e.index_op(&base, IndexOp::Add, Operand::Scalar(s), &full)?;
        let valid = e.compare(&pos, Cmp::Lt, Operand::Scalar(k), &full)?;
        let r = e.gather(&t.rows, &pos, &valid)?;
        let c = e.gather(&t.cols, &pos, &valid)?;
        let v = e.gather(&t.values, &pos, &valid)?;
        let cont = e.mask_and(&valid, &open)?;
        let same_r = e.compare(&r, Cmp::Eq, Operand::Reg(&cur_row), &cont)?;
        let same_c = e.compare(&c, Cmp::Eq, Operand::Reg(&cur_col), &cont)?;
        let same = e.mask_and(&same_r, &same_c)?;
        let closing = e.mask_andnot(&cont, &same)?;
        flush(e, &mut runs, &mut count, &closing, &cur_row, &cur_col, &cur_val)?;
        cur_val = e.add(&cur_val, Operand::Reg(&v), &same)?;
        let starting = e.mask_andnot(&valid, &same)?;
        cur_row = e.merge(&cur_row, Operand::Reg(&r), &starting)?;
        cur_col = e.merge(&cur_col, Operand::Reg(&c), &starting)?;
        cur_val = e.merge(&cur_val, Operand::Reg(&v), &starting)?;
        open = e.mask_or(&open, &valid)?;
    }
    flush(e, &mut runs, &mut count, &open, &cur_row, &cur_col, &cur_val)?;

    // Sequential pass over processors: join runs split across a segment
    // boundary, then append.
    let mut out = EscTriplets::zeroed(k);
    let mut len = 0;
    for p in 0..procs {
        let n = count.lane(p);
        if n == 0 {
            continue;
        }
        e.count_iteration();
        let mut from = p * part.chunk;
        let end = from + n;
        if len > 0 && (out.cols[len - 1], out.rows[len - 1]) == (runs.cols[from], runs.rows[from]) {
            out.values[len - 1] = out.values[len - 1] + runs.values[from];
            from += 1;
        }
        while from < end {
            let vl = e.set_vl(end - from);
            let rows = e.load(&runs.rows, from)?;
            let cols = e.load(&runs.cols, from)?;
            let vals = e.load(&runs.values, from)?;
            e.store(&rows, &mut out.rows, len)?;
            e.store(&cols, &mut out.cols, len)?;
            e.store(&vals, &mut out.values, len)?;
            len += vl;
            from += vl;
        }
    }
    out.rows.truncate(len);
    out.cols.truncate(len);
    out.values.truncate(len);
    Ok(out)
}

/// ESC product over greedy column groups. The result is canonical.
pub fn esc_kernel<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    params: &EscParams,
    engine: &mut VecEngine,
) -> Result<KernelOutput<T>> {
    check_dims(a, b)?;
    engine.reset_counters();
    let ops = compute_ops(a, b)?;
    let mut column_pointers = vec![0usize; b.ncols() + 1];
    let mut row_indices = Vec::new();
    let mut values = Vec::new();
    for group in esc_groups(&ops, params.group_threshold) {
        let t = esc_expand(engine, a, b, group)?;
        if t.is_empty() {
            continue;
        }
        let t = esc_radix_sort(engine, t, a.nrows(), b.ncols(), params.radix)?;
        let t = esc_compress(engine, &t)?;
        for &c in &t.cols {
            column_pointers[c + 1] += 1;
        }
        row_indices.extend(t.rows);
        values.extend(t.values);
    }
    for j in 0..b.ncols() {
        column_pointers[j + 1] += column_pointers[j];
    }
    Ok(KernelOutput {
        matrix: CscMatrix::from_parts_unchecked(a.nrows(), b.ncols(), column_pointers, row_indices, values),
        report: *engine.report(),
        lane_cycles: engine.lane_cycles(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::fixtures::{worked_a, worked_b, worked_c};
    use crate::sparse::{dense_oracle, generate_random, generate_synthetic, matrices_match};

    #[test]
    fn radix_chooser() {
        assert_eq!(key_bits(1), 0);
        assert_eq!(key_bits(2), 1);
        assert_eq!(key_bits(1024), 10);
        assert_eq!(key_bits(1025), 11);
        // 12 bits: 2 passes of 6 against 3 of 5.
        assert_eq!(choose_radix(4096), 6);
        // 10 bits: 2 passes either way.
        assert_eq!(choose_radix(1024), 5);
        assert_eq!(choose_radix(1), 5);
    }

    #[test]
    fn groups_close_at_threshold() {
        assert_eq!(esc_groups(&[3, 4, 4, 6], 1), vec![0..1, 1..2, 2..3, 3..4]);
        assert_eq!(esc_groups(&[3, 4, 4, 6], 7), vec![0..2, 2..4]);
        assert_eq!(esc_groups(&[3, 4, 4, 6], 100), vec![0..4]);
        assert_eq!(esc_groups(&[0, 0, 5], 1), vec![0..3]);
        assert!(esc_groups(&[], 1).is_empty());
    }

    #[test]
    fn worked_expand_sort_compress() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        let mut e = VecEngine::default();
        let t = esc_expand(&mut e, &a, &b, 0..4).unwrap();
        assert_eq!(t.len(), 17);
        assert_eq!(e.report().loop_iterations, 11);
        let s = esc_radix_sort(&mut e, t.clone(), 4, 4, RadixPolicy::Auto).unwrap();
        assert!(s.is_sorted());
        let mut want: Vec<_> = (0..17).map(|i| (t.cols[i], t.rows[i])).collect();
        want.sort();
        let got: Vec<_> = (0..17).map(|i| (s.cols[i], s.rows[i])).collect();
        assert_eq!(got, want);
        let c = esc_compress(&mut e, &s).unwrap();
        assert_eq!(c.len(), 13);
    }

    #[test]
    fn sort_is_stable() {
        let mut e = VecEngine::new(4, 4);
        let t = EscTriplets {
            rows: vec![1, 0, 1, 1, 0, 1],
            cols: vec![0, 0, 0, 0, 0, 0],
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        };
        let s = esc_radix_sort(&mut e, t, 2, 1, RadixPolicy::Fixed(1)).unwrap();
        assert_eq!(s.rows, [0, 0, 1, 1, 1, 1]);
        assert_eq!(s.values, [2.0, 5.0, 1.0, 3.0, 4.0, 6.0]);
    }

    #[test]
    fn compress_joins_runs_across_segments() {
        let mut e = VecEngine::new(4, 4);
        let t = EscTriplets {
            rows: vec![2; 9],
            cols: vec![1; 9],
            values: vec![1.0; 9],
        };
        let c = esc_compress(&mut e, &t).unwrap();
        assert_eq!((c.rows, c.cols, c.values), (vec![2], vec![1], vec![9.0]));
    }

    #[test]
    fn worked_kernel_every_grouping() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        for th in [1, 5, 8, 17, 10_000] {
            let p = EscParams {
                group_threshold: th,
                radix: RadixPolicy::Auto,
            };
            let out = esc_kernel(&a, &b, &p, &mut VecEngine::default()).unwrap();
            assert_eq!(out.matrix, worked_c());
            assert!(out.matrix.is_canonical());
        }
    }

    #[test]
    fn matches_oracle_on_random_rectangles() {
        let a = generate_random::<f64>(70, 50, 0.08, 1).unwrap();
        let b = generate_random::<f64>(50, 90, 0.08, 2).unwrap();
        let want = dense_oracle(&a, &b).unwrap();
        for (vl, th) in [(256, 10_000), (8, 30), (3, 1)] {
            for radix in [RadixPolicy::Auto, RadixPolicy::Fixed(2)] {
                let p = EscParams {
                    group_threshold: th,
                    radix,
                };
                let out = esc_kernel(&a, &b, &p, &mut VecEngine::new(vl, 8)).unwrap();
                assert!(matrices_match(&out.matrix, &want, 1e-12));
            }
        }
    }

    #[test]
    fn large_synthetic() {
        let a = generate_synthetic::<f64>(500, 6, 4).unwrap();
        let out = esc_kernel(&a, &a, &EscParams::default(), &mut VecEngine::default()).unwrap();
        assert!(matrices_match(&out.matrix, &dense_oracle(&a, &a).unwrap(), 1e-12));
    }

    #[test]
    fn bad_radix_is_rejected() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        let p = EscParams {
            group_threshold: 1,
            radix: RadixPolicy::Fixed(0),
        };
        assert!(esc_kernel(&a, &b, &p, &mut VecEngine::default()).is_err());
    }
}
