use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

fn column_rng(seed: u64, col: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(col as u64);
    rng
}

/// `n × n` matrix with exactly `z` non-zeros in every column.
///
/// Positions are drawn uniformly without replacement; values are uniform in
/// `[1, 2)` so no product can cancel. Column `j` depends only on
/// `(seed, j)`.
pub fn generate_synthetic<T: Scalar>(n: usize, z: usize, seed: u64) -> Result<CscMatrix<T>> {
    if z == 0 || z > n {
        return Err(Error::input(format!(
            "non-zeros per column must satisfy 0 < Z <= n (Z = {z}, n = {n})"
        )));
    }
    let mut column_pointers = Vec::with_capacity(n + 1);
    let mut row_indices = Vec::with_capacity(n * z);
    let mut values = Vec::with_capacity(n * z);
    column_pointers.push(0);
    for j in 0..n {
        let mut rng = column_rng(seed, j);
        let mut rows = sample(&mut rng, n, z).into_vec();
        rows.sort_unstable();
        for r in rows {
            row_indices.push(r);
            values.push(T::from_f64(rng.random_range(1.0..2.0)).unwrap());
        }
        column_pointers.push(row_indices.len());
    }
    CscMatrix::new(n, n, column_pointers, row_indices, values)
}

/// `nrows × ncols` matrix where each entry is present with probability
/// `density`, values uniform in `[-2, 2)`. Columns may be empty.
pub fn generate_random<T: Scalar>(
    nrows: usize,
    ncols: usize,
    density: f64,
    seed: u64,
) -> Result<CscMatrix<T>> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::input(format!("density {density} outside [0, 1]")));
    }
    let mut column_pointers = Vec::with_capacity(ncols + 1);
    let mut row_indices = Vec::new();
    let mut values = Vec::new();
    column_pointers.push(0);
    for j in 0..ncols {
        let mut rng = column_rng(seed, j);
        for r in 0..nrows {
            if rng.random_bool(density) {
                let v: f64 = rng.random_range(-2.0..2.0);
                if v != 0.0 {
                    row_indices.push(r);
                    values.push(T::from_f64(v).unwrap());
                }
            }
        }
        column_pointers.push(row_indices.len());
    }
    CscMatrix::new(nrows, ncols, column_pointers, row_indices, values)
}
