//! Linear-probing accumulator with `h(i) = (i·c) mod H`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Knuth's multiplicative constant; odd, so `i ↦ i·c mod H` is a bijection
/// for every power-of-two `H`.
pub const DEFAULT_HASH_C: usize = 2654435761;

/// Home slot of row `i` in a table of `size` cells (`size` a power of two).
pub fn hash_slot(i: usize, c: usize, size: usize) -> usize {
    i.wrapping_mul(c) & (size - 1)
}

/// Scalar hash accumulator for one output column.
///
/// Empty cells hold `sentinel` in the key array, which must not be a valid
/// row index.
#[derive(Debug, Clone)]
pub struct HashTable<T> {
    keys: Vec<usize>,
    values: Vec<T>,
    fill: usize,
    sentinel: usize,
    c: usize,
}

impl<T: Scalar> HashTable<T> {
    pub fn new(size: usize, sentinel: usize, c: usize) -> Result<Self> {
        if !size.is_power_of_two() {
            return Err(Error::input(format!("hash table size {size} is not a power of two")));
        }
        Ok(HashTable {
            keys: vec![sentinel; size],
            values: vec![T::zero(); size],
            fill: 0,
            sentinel,
            c,
        })
    }

    pub fn size(&self) -> usize {
        self.keys.len()
    }

    pub fn fill(&self) -> usize {
        self.fill
    }

    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Add `value` into row `row`'s cell. Returns the cell used and the
    /// number of probes beyond the home slot.
    pub fn accumulate(&mut self, row: usize, value: T) -> Result<(usize, usize)> {
        let size = self.size();
        let mut pos = hash_slot(row, self.c, size);
        for probes in 0..size {
            let key = self.keys[pos];
            if key == row {
                self.values[pos] = self.values[pos] + value;
                return Ok((pos, probes));
            }
            if key == self.sentinel {
                self.keys[pos] = row;
                self.values[pos] = value;
                self.fill += 1;
                return Ok((pos, probes));
            }
            pos = (pos + 1) & (size - 1);
        }
        Err(Error::Internal(format!("hash table of size {size} is full")))
    }

    /// Occupied `(row, value)` pairs in cell order.
    pub fn entries(&self) -> Vec<(usize, T)> {
        self.keys
            .iter()
            .zip(&self.values)
            .filter(|(&k, _)| k != self.sentinel)
            .map(|(&k, &v)| (k, v))
            .collect()
    }

    pub fn clear(&mut self) {
        self.keys.fill(self.sentinel);
        self.values.fill(T::zero());
        self.fill = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_probes_to_next_cell() {
        let mut t = HashTable::<f64>::new(8, usize::MAX, 1).unwrap();
        assert_eq!(t.accumulate(0, 1.0).unwrap(), (0, 0));
        assert_eq!(t.accumulate(8, 2.0).unwrap(), (1, 1));
        assert_eq!(t.accumulate(8, 0.5).unwrap(), (1, 1));
        assert_eq!(t.entries(), vec![(0, 1.0), (8, 2.5)]);
        assert_eq!(t.fill(), 2);
    }

    #[test]
    fn probing_wraps_around() {
        let mut t = HashTable::<f64>::new(4, usize::MAX, 1).unwrap();
        t.accumulate(3, 1.0).unwrap();
        assert_eq!(t.accumulate(7, 1.0).unwrap(), (0, 1));
    }

    #[test]
    fn full_table_is_internal_error() {
        let mut t = HashTable::<f64>::new(2, usize::MAX, 1).unwrap();
        t.accumulate(0, 1.0).unwrap();
        t.accumulate(1, 1.0).unwrap();
        assert!(matches!(t.accumulate(2, 1.0), Err(Error::Internal(_))));
    }

    #[test]
    fn default_multiplier_is_a_bijection() {
        for size in [1, 2, 8, 64, 1024] {
            let mut seen = vec![false; size];
            for i in 0..size {
                seen[hash_slot(i, DEFAULT_HASH_C, size)] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn size_must_be_power_of_two() {
        assert!(HashTable::<f64>::new(6, 0, 1).is_err());
    }

    #[test]
    fn clear_empties() {
        let mut t = HashTable::<f64>::new(4, 99, 3).unwrap();
        t.accumulate(2, 1.0).unwrap();
        t.clear();
        assert_eq!(t.fill(), 0);
        assert!(t.entries().is_empty());
    }
}
