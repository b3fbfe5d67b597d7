use serde::{Deserialize, Serialize};
use spgemm_core::plan::compute_ops;
use spgemm_core::CscMatrix;

use crate::error::Result;

/// Min, max, mean and population variance of a count distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: u64,
    pub max: u64,
    pub avg: f64,
    pub var: f64,
}

/// One pass with Welford's update. Empty input summarises to all zeros.
pub fn summarize(xs: impl IntoIterator<Item = usize>) -> Summary {
    let mut n = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let (mut min, mut max) = (u64::MAX, 0u64);
    for x in xs {
        let x = x as u64;
        n += 1;
        min = min.min(x);
        max = max.max(x);
        let xf = x as f64;
        let delta = xf - mean;
        mean += delta / n as f64;
        m2 += delta * (xf - mean);
    }
    if n == 0 {
        return Summary::default();
    }
    Summary {
        min,
        max,
        avg: mean,
        var: m2 / n as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub name: String,
    pub nrows: usize,
    pub ncols: usize,
    pub nnz: usize,
    pub nnz_per_column: Summary,
    /// Multiplications each column of `A·B` needs.
    pub mults_per_column: Summary,
}

impl MatrixStats {
    /// Column statistics of `b` and of the products of `a·b`.
    pub fn of(name: &str, a: &CscMatrix<f64>, b: &CscMatrix<f64>) -> Result<Self> {
        let ops = compute_ops(a, b)?;
        Ok(MatrixStats {
            name: name.to_string(),
            nrows: b.nrows(),
            ncols: b.ncols(),
            nnz: b.nnz(),
            nnz_per_column: summarize(b.col_counts()),
            mults_per_column: summarize(ops),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spgemm_core::sparse::fixtures::{worked_a, worked_b};

    #[test]
    fn worked_stats() {
        let s = MatrixStats::of("worked", &worked_a(), &worked_b()).unwrap();
        assert_eq!(s.nnz, 11);
        assert_eq!((s.mults_per_column.min, s.mults_per_column.max), (3, 6));
        assert_eq!(s.mults_per_column.avg, 17.0 / 4.0);
        // ops 3,4,4,6: squared deviations sum to 4.75.
        assert!((s.mults_per_column.var - 4.75 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_input_has_zero_variance() {
        let s = summarize([5; 10]);
        assert_eq!((s.min, s.max, s.avg, s.var), (5, 5, 5.0, 0.0));
    }

    #[test]
    fn empty_input() {
        assert_eq!(summarize(std::iter::empty()), Summary::default());
    }
}
