use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{DenseMatrix, TripletList};

/// Compressed-sparse-column matrix.
///
/// Row indices inside a column are always distinct; they are sorted only
/// when [`CscMatrix::is_canonical`] holds. Kernels emit rows in first-touch
/// order, so use [`CscMatrix::canonicalize`] before structural comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawCsc<T>",
    into = "RawCsc<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct CscMatrix<T> {
    nrows: usize,
    ncols: usize,
    column_pointers: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<T>,
    canonical: bool,
}

/// On-disk JSON form.
#[derive(Serialize, Deserialize)]
struct RawCsc<T> {
    nrows: usize,
    ncols: usize,
    column_pointers: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<RawCsc<T>> for CscMatrix<T> {
    type Error = Error;

    fn try_from(raw: RawCsc<T>) -> Result<Self> {
        CscMatrix::new(
            raw.nrows,
            raw.ncols,
            raw.column_pointers,
            raw.row_indices,
            raw.values,
        )
    }
}

impl<T: Scalar> From<CscMatrix<T>> for RawCsc<T> {
    fn from(m: CscMatrix<T>) -> Self {
        RawCsc {
            nrows: m.nrows,
            ncols: m.ncols,
            column_pointers: m.column_pointers,
            row_indices: m.row_indices,
            values: m.values,
        }
    }
}

impl<T: Scalar> CscMatrix<T> {
    /// Build from raw arrays, validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        column_pointers: Vec<usize>,
        row_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if column_pointers.len() != ncols + 1 {
            return Err(Error::input(format!(
                "column_pointers has length {}, expected {}",
                column_pointers.len(),
                ncols + 1
            )));
        }
        if column_pointers[0] != 0 {
            return Err(Error::input("column_pointers[0] must be 0"));
        }
        if column_pointers.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("column_pointers must be non-decreasing"));
        }
        if row_indices.len() != values.len() {
            return Err(Error::input(format!(
                "{} row indices but {} values",
                row_indices.len(),
                values.len()
            )));
        }
        if column_pointers[ncols] != row_indices.len() {
            return Err(Error::input(format!(
                "column_pointers[ncols] = {} but nnz = {}",
                column_pointers[ncols],
                row_indices.len()
            )));
        }

        // Stamp each row with the last column that used it to detect repeats.
        let mut seen = vec![usize::MAX; nrows];
        let mut canonical = true;
        for j in 0..ncols {
            let rows = &row_indices[column_pointers[j]..column_pointers[j + 1]];
            for (p, &r) in rows.iter().enumerate() {
                if r >= nrows {
                    return Err(Error::input(format!(
                        "row index {r} out of bounds in column {j} ({nrows} rows)"
                    )));
                }
                if seen[r] == j {
                    return Err(Error::input(format!("row {r} repeated in column {j}")));
                }
                seen[r] = j;
                if p > 0 && rows[p - 1] > r {
                    canonical = false;
                }
            }
        }

        Ok(CscMatrix {
            nrows,
            ncols,
            column_pointers,
            row_indices,
            values,
            canonical,
        })
    }

    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        column_pointers: Vec<usize>,
        row_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Self {
        let canonical = (0..ncols).all(|j| {
            row_indices[column_pointers[j]..column_pointers[j + 1]]
                .windows(2)
                .all(|w| w[0] < w[1])
        });
        debug_assert!(
            Self::new(
                nrows,
                ncols,
                column_pointers.clone(),
                row_indices.clone(),
                values.clone()
            )
            .is_ok(),
            "kernel produced an invalid CSC matrix"
        );
        CscMatrix {
            nrows,
            ncols,
            column_pointers,
            row_indices,
            values,
            canonical,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            column_pointers: vec![0; ncols + 1],
            row_indices: Vec::new(),
            values: Vec::new(),
            canonical: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            column_pointers: (0..=n).collect(),
            row_indices: (0..n).collect(),
            values: vec![T::one(); n],
            canonical: true,
        }
    }

    /// Sum duplicates, drop exact zeros, sort rows within each column.
    pub fn from_triplets(t: &TripletList<T>) -> Result<Self> {
        let (nrows, ncols) = (t.nrows(), t.ncols());
        let mut counts = vec![0usize; ncols + 1];
        for &(r, c, _) in t.entries() {
            if r >= nrows || c >= ncols {
                return Err(Error::input(format!(
                    "triplet ({r}, {c}) out of bounds for {nrows}x{ncols}"
                )));
            }
            counts[c + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut bucket = vec![(0usize, T::zero()); t.entries().len()];
        for &(r, c, v) in t.entries() {
            bucket[next[c]] = (r, v);
            next[c] += 1;
        }

        let mut column_pointers = Vec::with_capacity(ncols + 1);
        let mut row_indices = Vec::new();
        let mut values = Vec::new();
        column_pointers.push(0);
        for j in 0..ncols {
            let col = &mut bucket[counts[j]..counts[j + 1]];
            col.sort_by_key(|&(r, _)| r);
            let mut p = 0;
            while p < col.len() {
                let row = col[p].0;
                let mut sum = T::zero();
                while p < col.len() && col[p].0 == row {
                    sum = sum + col[p].1;
                    p += 1;
                }
                if sum != T::zero() {
                    row_indices.push(row);
                    values.push(sum);
                }
            }
            column_pointers.push(row_indices.len());
        }

        Ok(CscMatrix {
            nrows,
            ncols,
            column_pointers,
            row_indices,
            values,
            canonical: true,
        })
    }

    /// Entries in column-major storage order.
    pub fn to_triplets(&self) -> TripletList<T> {
        let mut entries = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            entries.extend(rows.iter().zip(vals).map(|(&r, &v)| (r, j, v)));
        }
        TripletList::from_entries_unchecked(self.nrows, self.ncols, entries)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.row_indices.len()
    }

    pub fn column_pointers(&self) -> &[usize] {
        &self.column_pointers
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// True when every column's rows are strictly ascending.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let (s, e) = (self.column_pointers[j], self.column_pointers[j + 1]);
        (&self.row_indices[s..e], &self.values[s..e])
    }

    #[inline]
    pub fn col_nnz(&self, j: usize) -> usize {
        self.column_pointers[j + 1] - self.column_pointers[j]
    }

    /// Per-column non-zero counts.
    pub fn col_counts(&self) -> Vec<usize> {
        self.column_pointers.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Same matrix with rows sorted ascending inside every column.
    pub fn canonicalize(&self) -> Self {
        if self.canonical {
            return self.clone();
        }
        let mut row_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            scratch.clear();
            scratch.extend(rows.iter().copied().zip(vals.iter().copied()));
            scratch.sort_unstable_by_key(|&(r, _)| r);
            for &(r, v) in &scratch {
                row_indices.push(r);
                values.push(v);
            }
        }
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            column_pointers: self.column_pointers.clone(),
            row_indices,
            values,
            canonical: true,
        }
    }

    /// `self · P`: column `i` of the result is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.ncols)?;
        let mut column_pointers = Vec::with_capacity(self.ncols + 1);
        let mut row_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        column_pointers.push(0);
        for &src in perm {
            let (rows, vals) = self.col(src);
            row_indices.extend_from_slice(rows);
            values.extend_from_slice(vals);
            column_pointers.push(row_indices.len());
        }
        Ok(CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            column_pointers,
            row_indices,
            values,
            canonical: self.canonical,
        })
    }

    /// Inverse of [`permute_columns`](Self::permute_columns): column `i` of
    /// `self` lands at column `perm[i]`.
    pub fn unpermute_columns(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.ncols)?;
        let mut inverse = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        self.permute_columns(&inverse)
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                d.set(r, j, v);
            }
        }
        d
    }
}

impl<T: Scalar + Serialize> CscMatrix<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl<T: Scalar + for<'de> Deserialize<'de>> CscMatrix<T> {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::input(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut hit = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut hit[p], true) {
            return Err(Error::input("not a permutation"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::fixtures::{worked_a, worked_b};

    #[test]
    fn empty_triplets_give_empty_matrix() {
        let m = CscMatrix::<f64>::from_triplets(&TripletList::new(3, 3)).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.column_pointers(), &[0, 0, 0, 0]);
    }

    #[test]
    fn worked_a_column_counts() {
        assert_eq!(worked_a::<f64>().col_counts(), vec![2, 1, 2, 1]);
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletList::new(1, 1);
        t.push(0, 0, 1.0).unwrap();
        t.push(0, 0, 2.0).unwrap();
        let m = CscMatrix::from_triplets(&t).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.values(), &[3.0]);
    }

    #[test]
    fn cancelling_duplicates_are_dropped() {
        let t = TripletList::from_entries(2, 2, vec![(1, 0, 2.0), (1, 0, -2.0), (0, 1, 1.0)])
            .unwrap();
        let m = CscMatrix::from_triplets(&t).unwrap();
        assert_eq!(m.column_pointers(), &[0, 0, 1]);
    }

    #[test]
    fn out_of_bounds_triplet_is_input_error() {
        let t = TripletList::from_entries_unchecked(2, 2, vec![(2, 0, 1.0)]);
        assert!(matches!(
            CscMatrix::from_triplets(&t),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn new_rejects_repeated_rows() {
        let r = CscMatrix::new(3, 1, vec![0, 2], vec![1, 1], vec![1.0, 2.0]);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn new_tracks_canonical_flag() {
        let m = CscMatrix::new(3, 1, vec![0, 2], vec![2, 0], vec![1.0, 2.0]).unwrap();
        assert!(!m.is_canonical());
        let c = m.canonicalize();
        assert!(c.is_canonical());
        assert_eq!(c.row_indices(), &[0, 2]);
        assert_eq!(c.values(), &[2.0, 1.0]);
    }

    #[test]
    fn permute_then_unpermute_round_trips() {
        let b = worked_b::<f64>();
        let perm = [3, 1, 2, 0];
        let p = b.permute_columns(&perm).unwrap();
        assert_eq!(p.col(0), b.col(3));
        assert_eq!(p.unpermute_columns(&perm).unwrap(), b);
        assert!(b.permute_columns(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn json_has_exact_field_names_and_round_trips() {
        let a = worked_a::<f64>();
        let s = a.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["column_pointers", "ncols", "nrows", "row_indices", "values"]
        );
        assert_eq!(CscMatrix::<f64>::from_json(&s).unwrap(), a);
        let bad = r#"{"nrows":1,"ncols":1,"column_pointers":[0,1],"row_indices":[4],"values":[1.0]}"#;
        assert!(CscMatrix::<f64>::from_json(bad).is_err());
    }
}
