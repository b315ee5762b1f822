//! Test matrices, item sets and answer vectors.
//!
//! Items are zero-based throughout the library API. The text formats in
//! [`crate::format`] translate to and from the one-based numbering used on
//! disk and on the command line.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{tail_mask, words_for, BitVec, WORD_BITS};
use crate::error::{Error, Result};

/// How a matrix was produced. Stored in the GTM1 header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelTag {
    /// Independent cells (random incidence design).
    Rid,
    /// Constant row weight (random r-size design).
    RrSd,
    /// Built by hand or loaded from elsewhere.
    Explicit,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Rid => "RID",
            ModelTag::RrSd => "RrSD",
            ModelTag::Explicit => "Explicit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "RID" => Some(ModelTag::Rid),
            "RrSD" => Some(ModelTag::RrSd),
            "Explicit" => Some(ModelTag::Explicit),
            _ => None,
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An immutable `m x n` boolean matrix; rows are tests, columns are items.
///
/// Rows are bit-packed and stored contiguously.
#[derive(Clone, PartialEq, Eq)]
pub struct TestMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    seed: u64,
    model: ModelTag,
}

impl TestMatrix {
    /// Builds a matrix from packed row words. Every row must occupy
    /// `ceil(cols / 64)` words with padding bits clear.
    pub(crate) fn from_words(
        rows: usize,
        cols: usize,
        bits: Vec<u64>,
        seed: u64,
        model: ModelTag,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let words_per_row = words_for(cols);
        if bits.len() != rows * words_per_row {
            return Err(Error::input("packed storage does not match dimensions"));
        }
        let mask = tail_mask(cols);
        if bits
            .chunks_exact(words_per_row)
            .any(|row| row[words_per_row - 1] & !mask != 0)
        {
            return Err(Error::input("padding bits set past the last column"));
        }
        let matrix = TestMatrix {
            rows,
            cols,
            words_per_row,
            bits,
            seed,
            model,
        };
        if model == ModelTag::RrSd {
            matrix.check_constant_weight()?;
        }
        Ok(matrix)
    }

    pub fn from_rows(rows: &[BitVec], seed: u64, model: ModelTag) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::input("rows have differing lengths"));
        }
        let bits = rows
            .iter()
            .flat_map(|r| r.words().iter().copied())
            .collect();
        Self::from_words(rows.len(), cols, bits, seed, model)
    }

    /// Builds a matrix cell by cell; `cell(row, col)` is called in row-major order.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        seed: u64,
        model: ModelTag,
        mut cell: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let rows_vec: Vec<BitVec> = (0..rows)
            .map(|r| BitVec::from_bools((0..cols).map(|c| cell(r, c))))
            .collect();
        if rows == 0 {
            return Err(Error::domain(
                "matrix dimensions must be positive, got 0 rows",
            ));
        }
        Self::from_rows(&rows_vec, seed, model)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, 0, ModelTag::Explicit, |r, c| r == c)
    }

    fn check_constant_weight(&self) -> Result<()> {
        let weight = self.row_ones(0);
        if weight == 0 {
            return Err(Error::input("RrSD rows must have positive weight"));
        }
        if let Some(r) = (1..self.rows).find(|&r| self.row_ones(r) != weight) {
            return Err(Error::input(format!(
                "RrSD row {} has weight {}, expected {weight}",
                r + 1,
                self.row_ones(r)
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    /// Common row weight of an RrSD matrix.
    pub fn row_weight(&self) -> Option<usize> {
        (self.model == ModelTag::RrSd).then(|| self.row_ones(0))
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols);
        let w = self.bits[row * self.words_per_row + col / WORD_BITS];
        (w >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub(crate) fn row_words(&self, row: usize) -> &[u64] {
        let start = row * self.words_per_row;
        &self.bits[start..start + self.words_per_row]
    }

    pub fn row(&self, row: usize) -> BitVec {
        let mut v = BitVec::zeros(self.cols);
        for c in self.row_ones_iter(row) {
            v.set(c, true);
        }
        v
    }

    pub fn row_ones(&self, row: usize) -> usize {
        self.row_words(row)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn row_ones_iter(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(row)
            .iter()
            .enumerate()
            .flat_map(|(wi, &word)| {
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + tz)
                })
            })
    }

    /// Column vectors (length `m`) for the given items, gathered in one row scan.
    pub fn columns(&self, items: &[usize]) -> Vec<BitVec> {
        let mut out = vec![BitVec::zeros(self.rows); items.len()];
        for r in 0..self.rows {
            let words = self.row_words(r);
            for (col, &item) in out.iter_mut().zip(items) {
                if (words[item / WORD_BITS] >> (item % WORD_BITS)) & 1 == 1 {
                    col.set(r, true);
                }
            }
        }
        out
    }

    pub fn column(&self, item: usize) -> BitVec {
        self.columns(&[item]).pop().expect("one column requested")
    }

    /// Row-by-row text, one `0`/`1` character per cell.
    pub fn row_string(&self, row: usize) -> String {
        (0..self.cols)
            .map(|c| if self.get(row, c) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for TestMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TestMatrix({}x{}, {}, seed={})",
            self.rows, self.cols, self.model, self.seed
        )
    }
}

/// A strictly increasing set of zero-based item indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemSet {
    items: Vec<usize>,
}

impl ItemSet {
    pub fn empty() -> Self {
        ItemSet { items: Vec::new() }
    }

    /// Sorts the given indices; duplicates are rejected.
    pub fn new(mut items: Vec<usize>) -> Result<Self> {
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("duplicate item {}", w[0] + 1)));
        }
        Ok(ItemSet { items })
    }

    /// Wraps an already strictly increasing list.
    pub(crate) fn from_sorted(items: Vec<usize>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        ItemSet { items }
    }

    pub fn from_bits(bits: &BitVec) -> Self {
        ItemSet {
            items: bits.iter_ones().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().copied()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.items.last().copied()
    }

    /// Fails unless every index is below `n`.
    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.max() {
            Some(i) if i >= n => Err(Error::input(format!("item {} out of range 1..={n}", i + 1))),
            _ => Ok(()),
        }
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        let mut items: Vec<usize> = self.items.iter().chain(&other.items).copied().collect();
        items.sort_unstable();
        items.dedup();
        ItemSet { items }
    }

    pub fn is_subset_of(&self, other: &ItemSet) -> bool {
        self.items.iter().all(|&i| other.contains(i))
    }

    pub fn to_bits(&self, n: usize) -> BitVec {
        let mut v = BitVec::zeros(n);
        for &i in &self.items {
            v.set(i, true);
        }
        v
    }

    /// Space-separated one-based indices.
    pub fn to_one_based_string(&self) -> String {
        self.items
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut items: Vec<usize> = iter.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        ItemSet { items }
    }
}

/// Outcomes of the `m` tests, bit `j` set iff test `j` is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerVector(BitVec);

impl AnswerVector {
    pub fn from_bits(bits: BitVec) -> Self {
        AnswerVector(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, test: usize) -> bool {
        self.0.get(test)
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn positives(&self) -> usize {
        self.0.count_ones()
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

/// Test outcomes when the defective set is `items`: bit `j` is the OR of
/// row `j` over the columns in `items`.
pub fn answer_vector(matrix: &TestMatrix, items: &ItemSet) -> Result<AnswerVector> {
    items.check_within(matrix.cols())?;
    let mut bits = BitVec::zeros(matrix.rows());
    for r in 0..matrix.rows() {
        let words = matrix.row_words(r);
        let hit = items
            .iter()
            .any(|i| (words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1);
        if hit {
            bits.set(r, true);
        }
    }
    Ok(AnswerVector(bits))
}
