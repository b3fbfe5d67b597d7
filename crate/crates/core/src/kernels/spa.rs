use crate::error::Result;
use crate::kernels::{check_dims, ColumnSink, KernelOutput};
use crate::machine::{Cmp, Operand, VecEngine, VecMask};
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

/// Dense accumulator for one output column. Values and flags are all zero
/// between columns.
pub(crate) struct DenseSpa<T> {
    values: Vec<T>,
    flags: Vec<u8>,
    indices: Vec<usize>,
}

impl<T: Scalar> DenseSpa<T> {
    pub(crate) fn new(m: usize) -> Self {
        DenseSpa {
            values: vec![T::zero(); m],
            flags: vec![0; m],
            indices: vec![0; m],
        }
    }
}

/// One column of `A·B` where `B`'s column is given by its rows and values.
/// One loop iteration per non-zero of the `B` column.
pub(crate) fn spa_column<T: Scalar>(
    engine: &mut VecEngine,
    a: &CscMatrix<T>,
    b_rows: &[usize],
    b_vals: &[T],
    spa: &mut DenseSpa<T>,
) -> Result<(Vec<usize>, Vec<T>)> {
    let mut count = 0usize;
    for (&k, &bkj) in b_rows.iter().zip(b_vals) {
        engine.count_iteration();
        let start = a.column_pointers()[k];
        let end = a.column_pointers()[k + 1];
        let mut off = start;
        while off < end {
            let vl = engine.set_vl(end - off);
            let full = VecMask::full(vl);
            let va = engine.load(a.values(), off)?;
            let rows = engine.load(a.row_indices(), off)?;
            let acc = engine.gather(&spa.values, &rows, &full)?;
            let flags = engine.gather(&spa.flags, &rows, &full)?;
            let acc = engine.fma(&acc, &va, Operand::Scalar(bkj), &full)?;
            engine.scatter(&mut spa.values, &rows, &acc, &full)?;
            let fresh = engine.compare(&flags, Cmp::Eq, Operand::Scalar(0u8), &full)?;
            let ones = engine.broadcast(1u8);
            engine.scatter(&mut spa.flags, &rows, &ones, &fresh)?;
            count += engine.compress_store(&rows, &fresh, &mut spa.indices, count)?;
            off += vl;
        }
    }

    let mut out_rows = vec![0usize; count];
    let mut out_vals = vec![T::zero(); count];
    let mut off = 0;
    while off < count {
        let vl = engine.set_vl(count - off);
        let full = VecMask::full(vl);
        let rows = engine.load(&spa.indices, off)?;
        let vals = engine.gather(&spa.values, &rows, &full)?;
        engine.store(&rows, &mut out_rows, off)?;
        engine.store(&vals, &mut out_vals, off)?;
        let zero = engine.broadcast(T::zero());
        engine.scatter(&mut spa.values, &rows, &zero, &full)?;
        let clear = engine.broadcast(0u8);
        engine.scatter(&mut spa.flags, &rows, &clear, &full)?;
        off += vl;
    }
    Ok((out_rows, out_vals))
}

/// Column-at-a-time product with a dense accumulator, vectorised along each
/// column of `A`.
pub fn spa_kernel<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
    engine: &mut VecEngine,
) -> Result<KernelOutput<T>> {
    check_dims(a, b)?;
    engine.reset_counters();
    let mut spa = DenseSpa::new(a.nrows());
    let mut sink = ColumnSink::new(b.ncols());
    for j in 0..b.ncols() {
        let (rows, vals) = b.col(j);
        let (out_rows, out_vals) = spa_column(engine, a, rows, vals, &mut spa)?;
        sink.put(j, out_rows, out_vals);
    }
    Ok(KernelOutput {
        matrix: sink.finish(a.nrows()),
        report: *engine.report(),
        lane_cycles: engine.lane_cycles(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::fixtures::{worked_a, worked_b, worked_c};
    use crate::sparse::{dense_oracle, generate_synthetic, matrices_match};

    #[test]
    fn worked_product() {
        let mut e = VecEngine::default();
        let out = spa_kernel(&worked_a::<f64>(), &worked_b(), &mut e).unwrap();
        assert_eq!(out.matrix.canonicalize(), worked_c());
        assert_eq!(out.report.loop_iterations, 11);
        assert_eq!(out.report.elements_processed, 17);
    }

    #[test]
    fn first_touch_order_is_kept() {
        let mut e = VecEngine::default();
        let out = spa_kernel(&worked_a::<f64>(), &worked_b(), &mut e).unwrap();
        // Column 1 of B touches A[:,0] (rows 0, 2) then A[:,2] (rows 0, 3).
        assert_eq!(out.matrix.col(1).0, &[0, 2, 3]);
    }

    #[test]
    fn empty_b_column_costs_nothing() {
        let mut e = VecEngine::default();
        let out = spa_kernel(&worked_a::<f64>(), &CscMatrix::zeros(4, 3), &mut e).unwrap();
        assert_eq!(out.matrix.nnz(), 0);
        assert_eq!(out.report, Default::default());
    }

    #[test]
    fn long_columns_are_strip_mined() {
        let a = generate_synthetic::<f64>(40, 20, 5).unwrap();
        let mut e = VecEngine::new(8, 4);
        let out = spa_kernel(&a, &a, &mut e).unwrap();
        assert!(matrices_match(&out.matrix, &dense_oracle(&a, &a).unwrap(), 1e-12));
        assert_eq!(out.report.loop_iterations, 800);
        assert_eq!(out.report.elements_processed, 40 * 20 * 20);
    }

    #[test]
    fn counters_reset_between_calls() {
        let mut e = VecEngine::default();
        let first = spa_kernel(&worked_a::<f64>(), &worked_b(), &mut e).unwrap();
        let second = spa_kernel(&worked_a::<f64>(), &worked_b(), &mut e).unwrap();
        assert_eq!(first.report, second.report);
    }
}
