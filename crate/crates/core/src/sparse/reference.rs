//! Scalar reference products. Nothing here touches the vector model.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CscMatrix, DenseMatrix};

fn check_dims<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>) -> Result<()> {
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

/// Sequential column-by-column SPA product; also returns the number of
/// scalar multiplications performed.
pub fn gustavson_reference_counted<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CscMatrix<T>,
) -> Result<(CscMatrix<T>, u64)> {
    check_dims(a, b)?;
    let m = a.nrows();
    let mut spa_values = vec![T::zero(); m];
    let mut spa_flags = vec![false; m];
    let mut spa_indices = vec![0usize; m];
    let mut multiplications = 0u64;

    let mut column_pointers = Vec::with_capacity(b.ncols() + 1);
    let mut row_indices = Vec::new();
    let mut values = Vec::new();
    column_pointers.push(0);

    for j in 0..b.ncols() {
        let mut counter = 0;
        let (b_rows, b_vals) = b.col(j);
        for (&k, &bkj) in b_rows.iter().zip(b_vals) {
            let (a_rows, a_vals) = a.col(k);
            for (&i, &aik) in a_rows.iter().zip(a_vals) {
                spa_values[i] = spa_values[i] + aik * bkj;
                multiplications += 1;
                if !spa_flags[i] {
                    spa_flags[i] = true;
                    spa_indices[counter] = i;
                    counter += 1;
                }
            }
        }
        for &i in &spa_indices[..counter] {
            row_indices.push(i);
            values.push(spa_values[i]);
            spa_values[i] = T::zero();
            spa_flags[i] = false;
        }
        column_pointers.push(row_indices.len());
    }

    let c = CscMatrix::from_parts_unchecked(m, b.ncols(), column_pointers, row_indices, values);
    Ok((c.canonicalize(), multiplications))
}

/// `A·B` by the sequential SPA algorithm, returned in canonical form.
pub fn gustavson_reference<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>) -> Result<CscMatrix<T>> {
    gustavson_reference_counted(a, b).map(|(c, _)| c)
}

/// Textbook `i, j, k` triple loop over dense copies of the operands.
pub fn dense_oracle<T: Scalar>(a: &CscMatrix<T>, b: &CscMatrix<T>) -> Result<DenseMatrix<T>> {
    check_dims(a, b)?;
    let (m, inner, n) = (a.nrows(), a.ncols(), b.ncols());
    let da = a.to_dense();
    let db = b.to_dense();
    let mut c = DenseMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..inner {
                acc = acc + da.get(i, k) * db.get(k, j);
            }
            c.set(i, j, acc);
        }
    }
    Ok(c)
}

/// Entry-wise comparison with tolerance `rel_tol · max(1, |ref|)`.
///
/// Stored entries of `c` must match `reference`; entries of `reference`
/// that `c` does not store must be within the same tolerance of zero.
pub fn matrices_match<T: Scalar>(c: &CscMatrix<T>, reference: &DenseMatrix<T>, rel_tol: T) -> bool {
    if c.nrows() != reference.nrows() || c.ncols() != reference.ncols() {
        return false;
    }
    let close = |got: T, want: T| (got - want).abs() <= rel_tol * want.abs().max(T::one());
    let c = c.canonicalize();
    for j in 0..c.ncols() {
        let (rows, vals) = c.col(j);
        let mut stored = rows.iter().zip(vals).peekable();
        for i in 0..c.nrows() {
            let want = reference.get(i, j);
            let got = match stored.peek() {
                Some(&(&r, &v)) if r == i => {
                    stored.next();
                    v
                }
                _ => T::zero(),
            };
            if !close(got, want) {
                return false;
            }
        }
    }
    true
}

/// [`matrices_match`] against a sparse reference, for products too large to
/// densify.
pub fn csc_matches<T: Scalar>(c: &CscMatrix<T>, reference: &CscMatrix<T>, rel_tol: T) -> bool {
    if c.nrows() != reference.nrows() || c.ncols() != reference.ncols() {
        return false;
    }
    let close = |got: T, want: T| (got - want).abs() <= rel_tol * want.abs().max(T::one());
    let (c, r) = (c.canonicalize(), reference.canonicalize());
    (0..c.ncols()).all(|j| {
        let (mut got, mut want) = (c.col(j), r.col(j));
        loop {
            match (got.0.first(), want.0.first()) {
                (None, None) => return true,
                (Some(&gi), Some(&wi)) if gi == wi => {
                    if !close(got.1[0], want.1[0]) {
                        return false;
                    }
                    got = (&got.0[1..], &got.1[1..]);
                    want = (&want.0[1..], &want.1[1..]);
                }
                (Some(&gi), w) if w.is_none_or(|&wi| gi < wi) => {
                    if !close(got.1[0], T::zero()) {
                        return false;
                    }
                    got = (&got.0[1..], &got.1[1..]);
                }
                _ => {
                    if !close(T::zero(), want.1[0]) {
                        return false;
                    }
                    want = (&want.0[1..], &want.1[1..]);
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::fixtures::{worked_a, worked_b, worked_c, worked_c_dense};
    use crate::sparse::TripletList;

    #[test]
    fn worked_second_column() {
        let c = gustavson_reference(&worked_a::<f64>(), &worked_b()).unwrap();
        assert_eq!(c.to_dense().values().iter().skip(1).step_by(4).copied().collect::<Vec<_>>(), [16.0, 0.0, 4.0, 6.0]);
        assert_eq!(c, worked_c());
        assert_eq!(c.nnz(), 13);
    }

    #[test]
    fn worked_multiplication_count() {
        let (_, mults) = gustavson_reference_counted(&worked_a::<f64>(), &worked_b()).unwrap();
        assert_eq!(mults, 17);
    }

    #[test]
    fn identity_times_b_is_b() {
        let b = worked_b::<f64>();
        assert_eq!(gustavson_reference(&CscMatrix::identity(4), &b).unwrap(), b);
    }

    #[test]
    fn dense_oracle_worked() {
        let c = dense_oracle(&worked_a::<f64>(), &worked_b()).unwrap();
        assert_eq!(c.row(0), &[5.0, 16.0, 2.0, 8.0]);
        assert_eq!(c, worked_c_dense());
    }

    #[test]
    fn dense_oracle_trivia() {
        let zero = CscMatrix::<f64>::zeros(4, 4);
        let c = dense_oracle(&zero, &worked_b()).unwrap();
        assert_eq!(c.count_nonzero(), 0);

        let two = CscMatrix::from_triplets(&TripletList::from_entries(1, 1, vec![(0, 0, 2.0)]).unwrap()).unwrap();
        let three = CscMatrix::from_triplets(&TripletList::from_entries(1, 1, vec![(0, 0, 3.0)]).unwrap()).unwrap();
        assert_eq!(dense_oracle(&two, &three).unwrap().values(), &[6.0]);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let a = CscMatrix::<f64>::zeros(2, 3);
        let b = CscMatrix::<f64>::zeros(2, 2);
        assert!(matches!(gustavson_reference(&a, &b), Err(Error::Input(_))));
        assert!(matches!(dense_oracle(&a, &b), Err(Error::Input(_))));
    }

    #[test]
    fn match_exact_and_missing_entry() {
        let r = worked_c_dense::<f64>();
        assert!(matrices_match(&worked_c(), &r, 0.0));

        let t = worked_c::<f64>().to_triplets();
        let fewer: Vec<_> = t.entries()[1..].to_vec();
        let c = CscMatrix::from_triplets(&TripletList::from_entries(4, 4, fewer).unwrap()).unwrap();
        assert!(!matrices_match(&c, &r, 1e-12));
    }

    #[test]
    fn match_within_tolerance() {
        let r = DenseMatrix::from_rows(&[vec![1.0]]);
        let c = CscMatrix::new(1, 1, vec![0, 1], vec![0], vec![1.0 + 1e-15]).unwrap();
        assert!(matrices_match(&c, &r, 1e-12));
        assert!(!matrices_match(&c, &r, 0.0));
    }

    #[test]
    fn stored_cancelled_zero_matches_absent_reference() {
        let r = DenseMatrix::from_rows(&[vec![0.0]]);
        let c = CscMatrix::new(1, 1, vec![0, 1], vec![0], vec![0.0]).unwrap();
        assert!(matrices_match(&c, &r, 0.0));
    }

    #[test]
    fn sparse_comparison_agrees_with_dense() {
        let c = worked_c::<f64>();
        assert!(csc_matches(&c, &c, 0.0));
        let t = c.to_triplets();
        let fewer = CscMatrix::from_triplets(&TripletList::from_entries(4, 4, t.entries()[1..].to_vec()).unwrap()).unwrap();
        assert!(!csc_matches(&fewer, &c, 1e-12));
        assert!(!csc_matches(&c, &fewer, 1e-12));
        let zero_extra = CscMatrix::new(1, 1, vec![0, 1], vec![0], vec![0.0]).unwrap();
        assert!(csc_matches(&zero_extra, &CscMatrix::zeros(1, 1), 0.0));
        assert!(!csc_matches(&c, &CscMatrix::zeros(4, 5), 1.0));
    }

    #[test]
    fn shape_mismatch_does_not_match() {
        let r = DenseMatrix::<f64>::zeros(2, 2);
        assert!(!matrices_match(&CscMatrix::zeros(2, 3), &r, 1.0));
    }
}
