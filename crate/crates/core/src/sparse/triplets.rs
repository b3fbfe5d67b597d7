use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coordinate-form matrix; duplicates are allowed and summed on conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletList<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletList<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletList {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(nrows: usize, ncols: usize, entries: Vec<(usize, usize, T)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= nrows || c >= ncols) {
            return Err(Error::input(format!(
                "triplet ({r}, {c}) out of bounds for {nrows}x{ncols}"
            )));
        }
        Ok(TripletList {
            nrows,
            ncols,
            entries,
        })
    }

    pub(crate) fn from_entries_unchecked(
        nrows: usize,
        ncols: usize,
        entries: Vec<(usize, usize, T)>,
    ) -> Self {
        TripletList {
            nrows,
            ncols,
            entries,
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) -> Result<()> {
        if row >= self.nrows || col >= self.ncols {
            return Err(Error::input(format!(
                "triplet ({row}, {col}) out of bounds for {}x{}",
                self.nrows, self.ncols
            )));
        }
        self.entries.push((row, col, value));
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
