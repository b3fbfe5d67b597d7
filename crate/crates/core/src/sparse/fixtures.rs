//! The 4×4 worked example used throughout the docs and tests: the second
//! column of `C = A·B` is `1·A[:,0] + 3·A[:,2] = (16, 0, 4, 6)`.

use crate::scalar::Scalar;
use crate::sparse::{CscMatrix, DenseMatrix, TripletList};

fn from_grid<T: Scalar>(grid: [[i32; 4]; 4]) -> CscMatrix<T> {
    let mut t = TripletList::new(4, 4);
    for (i, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0 {
                t.push(i, j, T::from_i32(v).unwrap()).unwrap();
            }
        }
    }
    CscMatrix::from_triplets(&t).unwrap()
}

pub const WORKED_A: [[i32; 4]; 4] = [[1, 0, 5, 0], [0, 3, 0, 0], [4, 0, 0, 1], [0, 0, 2, 0]];

pub const WORKED_B: [[i32; 4]; 4] = [[0, 1, 2, 3], [2, 0, 4, 5], [1, 3, 0, 1], [0, 0, 1, 2]];

pub const WORKED_C: [[i32; 4]; 4] = [[5, 16, 2, 8], [6, 0, 12, 15], [0, 4, 9, 14], [2, 6, 0, 2]];

pub fn worked_a<T: Scalar>() -> CscMatrix<T> {
    from_grid(WORKED_A)
}

pub fn worked_b<T: Scalar>() -> CscMatrix<T> {
    from_grid(WORKED_B)
}

pub fn worked_c<T: Scalar>() -> CscMatrix<T> {
    from_grid(WORKED_C)
}

pub fn worked_c_dense<T: Scalar>() -> DenseMatrix<T> {
    DenseMatrix::from_rows(
        &WORKED_C
            .iter()
            .map(|r| r.iter().map(|&v| T::from_i32(v).unwrap()).collect())
            .collect::<Vec<_>>(),
    )
}
