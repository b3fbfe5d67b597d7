//! Column-blocked kernels: each lane of the vector unit owns one output
//! column of the current block and walks it independently.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::kernels::spa::{spa_column, DenseSpa};
use crate::kernels::{check_dims, Accumulator, ColumnSink, KernelOutput};
use crate::machine::{Cmp, IndexOp, Operand, VecEngine, VecMask, VecReg};
use crate::plan::{compute_ops, ColumnPlan};
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

/// Per-lane position in `B`'s column and in the current `A` column.
struct LaneCursors {
    b_pos: VecReg<usize>,
    b_end: VecReg<usize>,
    a_counter: VecReg<usize>,
    a_start: VecReg<usize>,
    a_len: VecReg<usize>,
    /// Lanes that still have a product to contribute.
    live: VecMask,
}

impl LaneCursors {
    fn start<T: Scalar>(
        e: &mut VecEngine,
        a: &CscMatrix<T>,
        bp: &CscMatrix<T>,
        first_col: usize,
    ) -> Result<Self> {
        let vl = e.vl();
        let b_pos = e.load(bp.column_pointers(), first_col)?;
        let b_end = e.load(bp.column_pointers(), first_col + 1)?;
        let mut cur = LaneCursors {
            b_pos,
            b_end,
            a_counter: e.broadcast(0),
            a_start: e.broadcast(0),
            a_len: e.broadcast(0),
            live: VecMask::none(vl),
        };
        cur.refresh(e, a, bp, VecMask::full(vl))?;
        Ok(cur)
    }

    /// Point `lanes` at their next non-empty `A` column, or retire them.
    fn refresh<T: Scalar>(
        &mut self,
        e: &mut VecEngine,
        a: &CscMatrix<T>,
        bp: &CscMatrix<T>,
        mut lanes: VecMask,
    ) -> Result<()> {
        loop {
            let in_range = e.compare(&self.b_pos, Cmp::Lt, Operand::Reg(&self.b_end), &lanes)?;
            let k = e.gather(bp.row_indices(), &self.b_pos, &in_range)?;
            let start = e.gather(a.column_pointers(), &k, &in_range)?;
            let k_next = e.index_op(&k, IndexOp::Add, Operand::Scalar(1), &in_range)?;
            let end = e.gather(a.column_pointers(), &k_next, &in_range)?;
            let len = e.index_op(&end, IndexOp::Sub, Operand::Reg(&start), &in_range)?;
            self.a_start = e.merge(&self.a_start, Operand::Reg(&start), &in_range)?;
            self.a_len = e.merge(&self.a_len, Operand::Reg(&len), &in_range)?;
            let empty = e.compare(&len, Cmp::Eq, Operand::Scalar(0), &in_range)?;
            let ready = e.mask_andnot(&in_range, &empty)?;
            let kept = e.mask_andnot(&self.live, &lanes)?;
            self.live = e.mask_or(&kept, &ready)?;
            if !e.mask_any(&empty)? {
                return Ok(());
            }
            self.b_pos = e.index_op(&self.b_pos, IndexOp::Add, Operand::Scalar(1), &empty)?;
            lanes = empty;
        }
    }

    /// `(b_kj, a_ik, i)` for every live lane.
    fn operands<T: Scalar>(
        &self,
        e: &mut VecEngine,
        a: &CscMatrix<T>,
        bp: &CscMatrix<T>,
    ) -> Result<(VecReg<T>, VecReg<T>, VecReg<usize>)> {
        let vb = e.gather(bp.values(), &self.b_pos, &self.live)?;
        let pos = e.index_op(&self.a_start, IndexOp::Add, Operand::Reg(&self.a_counter), &self.live)?;
        let va = e.gather(a.values(), &pos, &self.live)?;
        let rows = e.gather(a.row_indices(), &pos, &self.live)?;
        Ok((vb, va, rows))
    }

    fn advance<T: Scalar>(&mut self, e: &mut VecEngine, a: &CscMatrix<T>, bp: &CscMatrix<T>) -> Result<()> {
        let next = e.index_op(&self.a_counter, IndexOp::Add, Operand::Scalar(1), &self.live)?;
        let last = e.compare(&next, Cmp::Eq, Operand::Reg(&self.a_len), &self.live)?;
        self.a_counter = e.merge(&next, Operand::Scalar(0), &last)?;
        self.b_pos = e.index_op(&self.b_pos, IndexOp::Add, Operand::Scalar(1), &last)?;
        if e.mask_any(&last)? {
            self.refresh(e, a, bp, last)?;
        }
        Ok(())
    }
}

/// Lane-major dense accumulators: cell `row·VL + lane`, index list of lane
/// `l` at `l·m ..`.
struct DenseState<T> {
    values: Vec<T>,
    flags: Vec<u8>,
    indices: Vec<usize>,
}

impl<T: Scalar> DenseState<T> {
    fn new(m: usize, width: usize) -> Self {
        DenseState {
            values: vec![T::zero(); m * width],
            flags: vec![0; m * width],
            indices: vec![0; m * width],
        }
    }
}

fn dense_block<T: Scalar>(
    e: &mut VecEngine,
    a: &CscMatrix<T>,
    bp: &CscMatrix<T>,
    cols: Range<usize>,
    st: &mut DenseState<T>,
    sink: &mut ColumnSink<T>,
) -> Result<()> {
    let m = a.nrows();
    let width = e.set_vl(cols.len());
    let full = VecMask::full(width);
    let lane = e.iota();
    let lane_base = e.index_op(&lane, IndexOp::Mul, Operand::Scalar(m), &full)?;
    let ones = e.broadcast(1u8);
    let mut count = e.broadcast(0usize);
    let mut cur = LaneCursors::start(e, a, bp, cols.start)?;

    while e.mask_any(&cur.live)? {
        e.count_iteration();
        let (vb, va, rows) = cur.operands(e, a, bp)?;
        let addr = e.index_op(&rows, IndexOp::Mul, Operand::Scalar(width), &cur.live)?;
        let addr = e.index_op(&addr, IndexOp::Add, Operand::Reg(&lane), &cur.live)?;
        let acc = e.gather(&st.values, &addr, &cur.live)?;
        let flags = e.gather(&st.flags, &addr, &cur.live)?;
        let acc = e.fma(&acc, &va, Operand::Reg(&vb), &cur.live)?;
        e.scatter(&mut st.values, &addr, &acc, &cur.live)?;
        let fresh = e.compare(&flags, Cmp::Eq, Operand::Scalar(0u8), &cur.live)?;
        e.scatter(&mut st.flags, &addr, &ones, &fresh)?;
        let slot = e.index_op(&lane_base, IndexOp::Add, Operand::Reg(&count), &fresh)?;
        e.scatter(&mut st.indices, &slot, &rows, &fresh)?;
        count = e.index_op(&count, IndexOp::Add, Operand::Scalar(1), &fresh)?;
        cur.advance(e, a, bp)?;
    }

    for l in 0..width {
        let n = count.lane(l);
        let mut out_rows = vec![0usize; n];
        let mut out_vals = vec![T::zero(); n];
        let mut off = 0;
        while off < n {
            let vl = e.set_vl(n - off);
            let full = VecMask::full(vl);
            let rows = e.load(&st.indices, l * m + off)?;
            let addr = e.index_op(&rows, IndexOp::Mul, Operand::Scalar(width), &full)?;
            let addr = e.index_op(&addr, IndexOp::Add, Operand::Scalar(l), &full)?;
            let vals = e.gather(&st.values, &addr, &full)?;
            e.store(&rows, &mut out_rows, off)?;
            e.store(&vals, &mut out_vals, off)?;
            let zero = e.broadcast(T::zero());
            e.scatter(&mut st.values, &addr, &zero, &full)?;
            let clear = e.broadcast(0u8);
            e.scatter(&mut st.flags, &addr, &clear, &full)?;
            off += vl;
        }
        sink.put(cols.start + l, out_rows, out_vals);
    }
    Ok(())
}

/// Lane-interleaved hash tables: cell `pos·VL + lane`. The occupied-cell
/// list of lane `l` lives at `l·H ..`.
struct HashState<T> {
    keys: Vec<usize>,
    values: Vec<T>,
    occupied: Vec<usize>,
    sentinel: usize,
}

impl<T: Scalar> HashState<T> {
    fn new(cells: usize, sentinel: usize) -> Self {
        HashState {
            keys: vec![sentinel; cells],
            values: vec![T::zero(); cells],
            occupied: vec![0; cells],
            sentinel,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn hash_block<T: Scalar>(
    e: &mut VecEngine,
    a: &CscMatrix<T>,
    bp: &CscMatrix<T>,
    cols: Range<usize>,
    size: usize,
    c: usize,
    st: &mut HashState<T>,
    sink: &mut ColumnSink<T>,
) -> Result<()> {
    let width = e.set_vl(cols.len());
    let full = VecMask::full(width);
    let lane = e.iota();
    let lane_base = e.index_op(&lane, IndexOp::Mul, Operand::Scalar(size), &full)?;
    let mut fill = e.broadcast(0usize);
    let mut cur = LaneCursors::start(e, a, bp, cols.start)?;

    while e.mask_any(&cur.live)? {
        e.count_iteration();
        let (vb, va, rows) = cur.operands(e, a, bp)?;
        let pos = e.index_op(&rows, IndexOp::Mul, Operand::Scalar(c), &cur.live)?;
        let mut pos = e.index_op(&pos, IndexOp::And, Operand::Scalar(size - 1), &cur.live)?;
        let mut pending = cur.live.clone();
        let mut inserting = VecMask::none(width);
        let mut rounds = 0;
        let addr = loop {
            let addr = e.index_op(&pos, IndexOp::Mul, Operand::Scalar(width), &cur.live)?;
            let addr = e.index_op(&addr, IndexOp::Add, Operand::Reg(&lane), &cur.live)?;
            let key = e.gather(&st.keys, &addr, &pending)?;
            let hit = e.compare(&key, Cmp::Eq, Operand::Reg(&rows), &pending)?;
            let empty = e.compare(&key, Cmp::Eq, Operand::Scalar(st.sentinel), &pending)?;
            inserting = e.mask_or(&inserting, &empty)?;
            let done = e.mask_or(&hit, &empty)?;
            pending = e.mask_andnot(&pending, &done)?;
            if !e.mask_any(&pending)? {
                break addr;
            }
            rounds += 1;
            if rounds >= size {
                return Err(Error::Internal(format!("hash table of size {size} is full")));
            }
            // A collision on any lane costs every lane another trip.
            e.count_iteration();
            pos = e.index_op(&pos, IndexOp::Add, Operand::Scalar(1), &pending)?;
            pos = e.index_op(&pos, IndexOp::And, Operand::Scalar(size - 1), &pending)?;
        };
        let acc = e.gather(&st.values, &addr, &cur.live)?;
        let acc = e.fma(&acc, &va, Operand::Reg(&vb), &cur.live)?;
        e.scatter(&mut st.values, &addr, &acc, &cur.live)?;
        e.scatter(&mut st.keys, &addr, &rows, &inserting)?;
        let slot = e.index_op(&lane_base, IndexOp::Add, Operand::Reg(&fill), &inserting)?;
        e.scatter(&mut st.occupied, &slot, &addr, &inserting)?;
        fill = e.index_op(&fill, IndexOp::Add, Operand::Scalar(1), &inserting)?;
        cur.advance(e, a, bp)?;
    }

    for l in 0..width {
        let n = fill.lane(l);
        let mut out_rows = vec![0usize; n];
        let mut out_vals = vec![T::zero(); n];
        let mut off = 0;
        while off < n {
            let vl = e.set_vl(n - off);
            let full = VecMask::full(vl);
            let cells = e.load(&st.occupied, l * size + off)?;
            let rows = e.gather(&st.keys, &cells, &full)?;
            let vals = e.gather(&st.values, &cells, &full)?;
            e.store(&rows, &mut out_rows, off)?;
            e.store(&vals, &mut out_vals, off)?;
            let empty = e.broadcast(st.sentinel);
            e.scatter(&mut st.keys, &cells, &empty, &full)?;
            let zero = e.broadcast(T::zero());
            e.scatter(&mut st.values, &cells, &zero, &full)?;
            off += vl;
        }
        sink.put(cols.start + l, out_rows, out_vals);
    }
    Ok(())
}

fn check_plan<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    plan: &ColumnPlan,
    acc: Accumulator,
    engine: &VecEngine,
) -> Result<()> {
    check_dims(a, b)?;
    if plan.ncols() != b.ncols() || compute_ops(a, b)? != plan.ops {
        return Err(Error::input("column plan was built for different operands"));
    }
    if let Some(r) = plan.blocks.iter().find(|r| r.len() > engine.max_vl()) {
        return Err(Error::input(format!(
            "block of {} columns exceeds the maximum vector length {}",
            r.len(),
            engine.max_vl()
        )));
    }
    if matches!(acc, Accumulator::Hash { .. }) {
        match &plan.hash_sizes {
            Some(h) if h.len() == plan.blocks.len() => {}
            _ => return Err(Error::input("hash accumulator needs a plan with hash table sizes")),
        }
    }
    Ok(())
}

/// Columns before `plan.hybrid_split` (in sorted order) go through the SPA
/// kernel; the rest are processed block by block with `acc`.
pub fn hybrid_kernel<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    plan: &ColumnPlan,
    acc: Accumulator,
    engine: &mut VecEngine,
) -> Result<KernelOutput<T>> {
    check_plan(a, b, plan, acc, engine)?;
    engine.reset_counters();
    let m = a.nrows();
    let bp = b.permute_columns(&plan.perm)?;
    let sorted_ops = plan.sorted_ops();
    let mut sink = ColumnSink::new(b.ncols());

    if plan.hybrid_split > 0 {
        let mut spa = DenseSpa::new(m);
        for pos in 0..plan.hybrid_split {
            let (rows, vals) = bp.col(pos);
            let (out_rows, out_vals) = spa_column(engine, a, rows, vals, &mut spa)?;
            sink.put(pos, out_rows, out_vals);
        }
    }

    let width = plan.blocks.iter().map(|r| r.len()).max().unwrap_or(0);
    let busy = |r: &Range<usize>| sorted_ops[r.start] > 0;
    match acc {
        Accumulator::Dense => {
            let mut st = DenseState::new(m, width);
            for r in plan.blocks.iter().filter(|r| busy(r)) {
                dense_block(engine, a, &bp, r.clone(), &mut st, &mut sink)?;
            }
        }
        Accumulator::Hash { c } => {
            let sizes = plan.hash_sizes.as_deref().unwrap_or_default();
            let largest = sizes.iter().copied().max().unwrap_or(0);
            let mut st = HashState::new(largest * width, m);
            for (r, &size) in plan.blocks.iter().zip(sizes) {
                if busy(r) {
                    hash_block(engine, a, &bp, r.clone(), size, c, &mut st, &mut sink)?;
                }
            }
        }
    }

    Ok(KernelOutput {
        matrix: sink.finish(m).unpermute_columns(&plan.perm)?,
        report: *engine.report(),
        lane_cycles: engine.lane_cycles(),
    })
}

fn require_no_prefix(plan: &ColumnPlan) -> Result<()> {
    if plan.hybrid_split != 0 {
        return Err(Error::input(
            "plan routes columns to SPA; use the hybrid kernel for a finite threshold",
        ));
    }
    Ok(())
}

/// Blocked product with dense per-lane accumulators.
pub fn spars_kernel<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    plan: &ColumnPlan,
    engine: &mut VecEngine,
) -> Result<KernelOutput<T>> {
    require_no_prefix(plan)?;
    hybrid_kernel(a, b, plan, Accumulator::Dense, engine)
}

/// Blocked product with per-lane hash tables, multiplier `c`.
pub fn hash_kernel<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    plan: &ColumnPlan,
    c: usize,
    engine: &mut VecEngine,
) -> Result<KernelOutput<T>> {
    require_no_prefix(plan)?;
    hybrid_kernel(a, b, plan, Accumulator::Hash { c }, engine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{spa_kernel, DEFAULT_HASH_C};
    use crate::plan::{PlanConfig, Threshold};
    use crate::sparse::fixtures::{worked_a, worked_b, worked_c};
    use crate::sparse::{dense_oracle, generate_random, generate_synthetic, matrices_match};

    fn plan(a: &CscMatrix<f64>, b: &CscMatrix<f64>, bmin: usize, bmax: usize) -> ColumnPlan {
        ColumnPlan::build(a, b, PlanConfig::blocked(bmin, bmax)).unwrap()
    }

    #[test]
    fn worked_spars() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        let mut e = VecEngine::default();
        let out = spars_kernel(&a, &b, &plan(&a, &b, 4, 4), &mut e).unwrap();
        assert_eq!(out.matrix.canonicalize(), worked_c());
        // One block of 4 lanes; the longest column needs 6 trips.
        assert_eq!(out.report.loop_iterations, 6);
        assert_eq!(out.report.elements_processed, 24);
    }

    #[test]
    fn worked_hash() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        let mut e = VecEngine::default();
        let out = hash_kernel(&a, &b, &plan(&a, &b, 1, 4), DEFAULT_HASH_C, &mut e).unwrap();
        assert_eq!(out.matrix.canonicalize(), worked_c());
    }

    #[test]
    fn worked_hybrid_split() {
        let (a, b) = (worked_a::<f64>(), worked_b::<f64>());
        let cfg = PlanConfig::blocked(1, 4).with_threshold(Threshold::Finite(4));
        let p = ColumnPlan::build(&a, &b, cfg).unwrap();
        assert_eq!(p.hybrid_split, 3);
        for acc in [Accumulator::Dense, Accumulator::Hash { c: DEFAULT_HASH_C }] {
            let out = hybrid_kernel(&a, &b, &p, acc, &mut VecEngine::default()).unwrap();
            assert_eq!(out.matrix.canonicalize(), worked_c());
        }
        assert!(spars_kernel(&a, &b, &p, &mut VecEngine::default()).is_err());
    }

    #[test]
    fn uniform_iterations_are_block_count_times_z_squared() {
        let a = generate_synthetic::<f64>(200, 3, 11).unwrap();
        let p = plan(&a, &a, 40, 40);
        let out = spars_kernel(&a, &a, &p, &mut VecEngine::default()).unwrap();
        assert_eq!(out.report.loop_iterations, 5 * 9);
        assert_eq!(out.report.elements_processed, 200 * 9);
    }

    #[test]
    fn handles_empty_columns_and_rectangles() {
        let a = generate_random::<f64>(37, 23, 0.1, 3).unwrap();
        let b = generate_random::<f64>(23, 41, 0.15, 4).unwrap();
        let want = dense_oracle(&a, &b).unwrap();
        for (bmin, bmax) in [(1, 1), (3, 9), (8, 8), (16, 64)] {
            let p = plan(&a, &b, bmin, bmax);
            let s = spars_kernel(&a, &b, &p, &mut VecEngine::default()).unwrap();
            assert!(matrices_match(&s.matrix, &want, 1e-12));
            let h = hash_kernel(&a, &b, &p, DEFAULT_HASH_C, &mut VecEngine::default()).unwrap();
            assert!(matrices_match(&h.matrix, &want, 1e-12));
        }
    }

    #[test]
    fn small_multiplier_collides_but_stays_correct() {
        let a = generate_synthetic::<f64>(64, 8, 2).unwrap();
        let p = plan(&a, &a, 8, 8);
        let good = hash_kernel(&a, &a, &p, DEFAULT_HASH_C, &mut VecEngine::default()).unwrap();
        let bad = hash_kernel(&a, &a, &p, 64, &mut VecEngine::default()).unwrap();
        assert!(matrices_match(&bad.matrix, &dense_oracle(&a, &a).unwrap(), 1e-12));
        assert!(bad.report.loop_iterations > good.report.loop_iterations);
    }

    #[test]
    fn all_zero_b_costs_nothing() {
        let a = worked_a::<f64>();
        let b = CscMatrix::zeros(4, 5);
        let out = spars_kernel(&a, &b, &plan(&a, &b, 2, 4), &mut VecEngine::default()).unwrap();
        assert_eq!(out.matrix.nnz(), 0);
        assert_eq!(out.report, Default::default());
    }

    #[test]
    fn stale_plan_is_rejected() {
        let a = worked_a::<f64>();
        let p = plan(&a, &worked_b(), 2, 4);
        let other = CscMatrix::identity(4);
        assert!(matches!(
            spars_kernel(&a, &other, &p, &mut VecEngine::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn block_wider_than_engine_is_rejected() {
        let a = generate_synthetic::<f64>(32, 2, 1).unwrap();
        let p = plan(&a, &a, 16, 16);
        assert!(spars_kernel(&a, &a, &p, &mut VecEngine::new(8, 8)).is_err());
    }

    #[test]
    fn zero_threshold_routes_every_column_to_spa() {
        let a = generate_synthetic::<f64>(30, 4, 9).unwrap();
        let cfg = PlanConfig::blocked(4, 8).with_threshold(Threshold::Finite(0));
        let p = ColumnPlan::build(&a, &a, cfg).unwrap();
        assert_eq!(p.hybrid_split, 30);
        let h = hybrid_kernel(&a, &a, &p, Accumulator::Dense, &mut VecEngine::default()).unwrap();
        let sorted = a.permute_columns(&p.perm).unwrap();
        let s = spa_kernel(&a, &sorted, &mut VecEngine::default()).unwrap();
        assert_eq!(h.report, s.report);
        assert_eq!(h.matrix, s.matrix.unpermute_columns(&p.perm).unwrap());
    }
}
