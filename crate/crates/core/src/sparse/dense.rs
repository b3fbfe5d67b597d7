use crate::scalar::Scalar;

/// Row-major dense matrix, used as the verification oracle's output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    values: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            values: vec![T::zero(); nrows * ncols],
        }
    }

    /// Build from a list of equal-length rows.
    ///
    /// # Panics
    ///
    /// If the rows are ragged.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        DenseMatrix {
            nrows: rows.len(),
            ncols,
            values: rows.concat(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.ncols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.values[row * self.ncols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.values[row * self.ncols..(row + 1) * self.ncols]
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}
