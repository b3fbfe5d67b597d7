//! The six SpGEMM algorithms. Each one resets the engine's counters on
//! entry, so the returned [`CostReport`] covers exactly one product.

mod blocked;
pub mod esc;
pub mod hash;
mod spa;

use crate::error::{Error, Result};
use crate::machine::CostReport;
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

pub use blocked::{hash_kernel, hybrid_kernel, spars_kernel};
pub use esc::{esc_kernel, EscParams, RadixPolicy};
pub use hash::{HashTable, DEFAULT_HASH_C};
pub use spa::spa_kernel;

/// Product matrix plus the cost of computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOutput<T> {
    /// Rows appear in first-touch order unless the kernel sorts them.
    pub matrix: CscMatrix<T>,
    pub report: CostReport,
    /// See [`crate::VecEngine::lane_cycles`].
    pub lane_cycles: u64,
}

/// Per-lane accumulator used by the blocked part of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulator {
    /// Dense `m_A × VL` arrays (SPARS).
    Dense,
    /// Linear-probing hash tables with multiplier `c` (HASH).
    Hash { c: usize },
}

pub(crate) fn check_dims<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(Error::input(format!(
            "dimension mismatch: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Output columns collected in processing order.
pub(crate) struct ColumnSink<T> {
    columns: Vec<(Vec<usize>, Vec<T>)>,
}

impl<T: Scalar> ColumnSink<T> {
    pub(crate) fn new(ncols: usize) -> Self {
        ColumnSink {
            columns: vec![(Vec::new(), Vec::new()); ncols],
        }
    }

    pub(crate) fn put(&mut self, col: usize, rows: Vec<usize>, values: Vec<T>) {
        self.columns[col] = (rows, values);
    }

    pub(crate) fn finish(self, nrows: usize) -> CscMatrix<T> {
        let ncols = self.columns.len();
        let nnz = self.columns.iter().map(|c| c.0.len()).sum();
        let mut column_pointers = Vec::with_capacity(ncols + 1);
        let mut row_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        column_pointers.push(0);
        for (rows, vals) in self.columns {
            row_indices.extend(rows);
            values.extend(vals);
            column_pointers.push(row_indices.len());
        }
        CscMatrix::from_parts_unchecked(nrows, ncols, column_pointers, row_indices, values)
    }
}
