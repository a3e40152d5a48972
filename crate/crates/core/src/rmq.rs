//! Range-minimum queries over immutable arrays.

use crate::{Error, Result};

/// Classic sparse table: `table[j][i] = min(values[i .. i + 2^j])`.
/// O(n log n) preprocessing, O(1) queries.
#[derive(Clone, Debug)]
pub struct SparseTable<T> {
    table: Vec<Vec<T>>,
}

impl<T: Copy + PartialOrd> SparseTable<T> {
    pub fn new(values: &[T]) -> Self {
        let mut table = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = table.last().unwrap();
            let next: Vec<T> = (0..=values.len() - 2 * width)
                .map(|i| min2(prev[i], prev[i + width]))
                .collect();
            table.push(next);
            width *= 2;
        }
        Self { table }
    }

    pub fn len(&self) -> usize {
        self.table[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.table[0].is_empty()
    }

    /// Minimum over the closed range `[a, b]`.
    pub fn min(&self, a: usize, b: usize) -> Result<T> {
        check_range(a, b, self.len())?;
        Ok(self.min_unchecked(a, b))
    }

    fn min_unchecked(&self, a: usize, b: usize) -> T {
        let level = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let row = &self.table[level];
        min2(row[a], row[b + 1 - (1 << level)])
    }
}

/// Sparse table over fixed-size block minima; the partial blocks at either
/// end of a query are scanned. Uses about `n / BLOCK * log n` extra words,
/// which keeps ten-million-entry arrays cheap.
#[derive(Clone, Debug)]
pub struct BlockRmq<'a, T> {
    values: &'a [T],
    blocks: SparseTable<T>,
}

const BLOCK: usize = 32;

impl<'a, T: Copy + PartialOrd> BlockRmq<'a, T> {
    pub fn new(values: &'a [T]) -> Self {
        let minima: Vec<T> = values
            .chunks(BLOCK)
            .map(|c| c.iter().copied().reduce(min2).unwrap())
            .collect();
        Self {
            values,
            blocks: SparseTable::new(&minima),
        }
    }

    pub fn min(&self, a: usize, b: usize) -> Result<T> {
        check_range(a, b, self.values.len())?;
        let (ba, bb) = (a / BLOCK, b / BLOCK);
        let scan = |lo: usize, hi: usize| self.values[lo..=hi].iter().copied().reduce(min2).unwrap();
        if bb <= ba + 1 {
            return Ok(scan(a, b));
        }
        let left = scan(a, (ba + 1) * BLOCK - 1);
        let right = scan(bb * BLOCK, b);
        let mid = self.blocks.min_unchecked(ba + 1, bb - 1);
        Ok(min2(min2(left, mid), right))
    }
}

/// Minimum of `values[a..=b]`.
pub fn range_min<T: Copy + PartialOrd>(values: &[T], a: usize, b: usize) -> Result<T> {
    check_range(a, b, values.len())?;
    SparseTable::new(values).min(a, b)
}

fn check_range(a: usize, b: usize, len: usize) -> Result<()> {
    if a > b {
        return Err(Error::invalid(format!("empty range [{a}, {b}]")));
    }
    if b >= len {
        return Err(Error::invalid(format!("index {b} out of bounds for length {len}")));
    }
    Ok(())
}

#[inline]
fn min2<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(v: &[f64], a: usize, b: usize) -> f64 {
        v[a..=b].iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn small_cases() {
        assert_eq!(range_min(&[5.0], 0, 0).unwrap(), 5.0);
        assert_eq!(range_min(&[3.0, 1.0, 4.0, 1.0, 5.0], 1, 3).unwrap(), 1.0);
        assert!(range_min(&[3.0, 1.0], 1, 0).is_err());
        assert!(range_min(&[3.0, 1.0], 0, 2).is_err());
    }

    #[test]
    fn random_queries_match_scan() {
        let mut rng = crate::seed::rng(11);
        let values: Vec<f64> = (0..1000).map(|_| crate::seed::unit_closed_open(&mut rng)).collect();
        let sparse = SparseTable::new(&values);
        let block = BlockRmq::new(&values);
        for _ in 0..10_000 {
            let a = crate::seed::below(&mut rng, 1000) as usize;
            let b = crate::seed::below(&mut rng, 1000) as usize;
            let (a, b) = (a.min(b), a.max(b));
            let want = naive(&values, a, b);
            assert_eq!(sparse.min(a, b).unwrap(), want);
            assert_eq!(block.min(a, b).unwrap(), want);
        }
    }

    proptest! {
        #[test]
        fn block_rmq_matches_scan(values in prop::collection::vec(-50i64..50, 1..400), a in 0usize..400, b in 0usize..400) {
            let n = values.len();
            let (a, b) = ((a % n).min(b % n), (a % n).max(b % n));
            let want = *values[a..=b].iter().min().unwrap();
            prop_assert_eq!(BlockRmq::new(&values).min(a, b).unwrap(), want);
            prop_assert_eq!(SparseTable::new(&values).min(a, b).unwrap(), want);
        }
    }
}
