//! Dense bit-packed vectors and matrices over GF(2).
//!
//! Rows are packed little-endian into `u64` words: column `j` of a row lives
//! in word `j / 64`, bit `j % 64`. Bits past the logical length of a row are
//! always zero, so whole-word comparisons and popcounts are exact.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters; index 0 is the leftmost character.
    /// Whitespace and underscores are ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_bools(&bits))
    }

    /// Builds a vector from packed words, clearing any bits past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen::<u64>()).collect();
        Self::from_words(len, words)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "length mismatch in and");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        BitVec {
            len: self.len,
            words,
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Hamming distance.
    pub fn distance(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in distance");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    /// Lowest index holding a one.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Sub-vector with entries at `idx` (in that order).
    pub fn select(&self, idx: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(idx.len());
        for (j, &i) in idx.iter().enumerate() {
            if self.get(i) {
                out.set(j, true);
            }
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense `rows x cols` matrix over GF(2), stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Result of reducing a matrix to reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// The reduced matrix; its first `pivots.len()` rows are nonzero.
    pub reduced: BitMatrix,
    /// Pivot column of each nonzero row, strictly increasing.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks `rows` as matrix rows; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            m.set_row(i, r);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let rows_v: Vec<BitVec> = (0..rows).map(|_| BitVec::random(cols, rng)).collect();
        Self::from_rows(cols, &rows_v)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        let s = self.stride;
        self.data[r * s..(r + 1) * s].copy_from_slice(v.words());
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let words = self.row_words(r);
            for (wi, &w) in words.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.set(wi * WORD_BITS + b, r, true);
                }
            }
        }
        t
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let ones: u32 = self
                .row_words(r)
                .iter()
                .zip(x.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Row combination `coeffs^T * self`: the XOR of rows selected by `coeffs`.
    pub fn combine_rows(&self, coeffs: &BitVec) -> BitVec {
        assert_eq!(coeffs.len(), self.rows, "dimension mismatch in combine_rows");
        let mut words = vec![0u64; self.stride];
        for r in coeffs.iter_ones() {
            for (acc, &w) in words.iter_mut().zip(self.row_words(r)) {
                *acc ^= w;
            }
        }
        BitVec {
            len: self.cols,
            words,
        }
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        let s = out.stride;
        for r in 0..self.rows {
            let dst = &mut out.data[r * s..(r + 1) * s];
            for (wi, &w) in self.row_words(r).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    for (acc, &x) in dst.iter_mut().zip(other.row_words(wi * WORD_BITS + b)) {
                        *acc ^= x;
                    }
                }
            }
        }
        out
    }

    /// Rows `idx[0], idx[1], ...` of `self`. Indices must be strictly increasing.
    pub fn select_rows(&self, idx: &[usize]) -> Result<BitMatrix> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.rows) {
            return Err(Error::InvalidArgument(format!(
                "row index {bad} out of range for {} rows",
                self.rows
            )));
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "row indices must be strictly increasing".into(),
            ));
        }
        Ok(self.gather_rows(idx))
    }

    /// Unchecked row gather in arbitrary order (indices assumed valid).
    pub(crate) fn gather_rows(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(idx.len(), self.cols);
        let s = self.stride;
        for (j, &i) in idx.iter().enumerate() {
            out.data[j * s..(j + 1) * s].copy_from_slice(self.row_words(i));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch in hstack");
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(r, c, true);
                }
            }
            for c in 0..other.cols {
                if other.get(r, c) {
                    out.set(r, self.cols + c, true);
                }
            }
        }
        out
    }

    #[inline]
    fn xor_row_into(&mut self, dst: usize, src: usize, from_word: usize) {
        let s = self.stride;
        for w in from_word..s {
            let v = self.data[src * s + w];
            self.data[dst * s + w] ^= v;
        }
    }

    #[inline]
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            let s = self.stride;
            for w in 0..s {
                self.data.swap(a * s + w, b * s + w);
            }
        }
    }

    /// Reduced row echelon form by Gauss-Jordan elimination. Columns are scanned
    /// left to right and the lowest-index remaining row with a one is chosen as
    /// pivot, so the result is deterministic.
    pub fn rref(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(p, row);
            let from = col / WORD_BITS;
            for r in 0..m.rows {
                if r != row && m.get(r, col) {
                    m.xor_row_into(r, row, from);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(p, row);
            let from = col / WORD_BITS;
            for r in row + 1..m.rows {
                if m.get(r, col) {
                    m.xor_row_into(r, row, from);
                }
            }
            row += 1;
        }
        row
    }

    /// Solves `self * x = b`. Returns `None` exactly when
    /// `rank(self) < rank(self | b)`. Free variables are set to zero.
    pub fn solve_consistent(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            let s = aug.stride;
            aug.data[r * s..r * s + self.stride].copy_from_slice(self.row_words(r));
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let ech = aug.rref();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVec::zeros(self.cols);
        for (i, &c) in ech.pivots.iter().enumerate() {
            if ech.reduced.get(i, self.cols) {
                x.set(c, true);
            }
        }
        Some(x)
    }

    /// Basis of `{x : self * x = 0}`, one basis vector per returned row.
    /// There is one vector per free column, with that column set to one.
    pub fn nullspace_rows(&self) -> BitMatrix {
        let ech = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (j, &f) in free.iter().enumerate() {
            basis.set(j, f, true);
            for (i, &p) in ech.pivots.iter().enumerate() {
                if ech.reduced.get(i, f) {
                    basis.set(j, p, true);
                }
            }
        }
        basis
    }

    /// Basis of `{x : self * x = 0}` with the basis vectors as columns.
    pub fn nullspace_basis(&self) -> BitMatrix {
        self.nullspace_rows().transpose()
    }

    /// Inverse of a square matrix, or `None` if it is singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let ech = self.hstack(&BitMatrix::identity(n)).rref();
        if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
            return None;
        }
        let right: Vec<usize> = (n..2 * n).collect();
        Some(ech.reduced.select_cols(&right))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Incrementally maintained basis of a subspace of GF(2)^len, used to test
/// whether a new vector is independent of those already accepted.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, BitVec)>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            rows: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis. The result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &mut BitVec) {
        for (pivot, b) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(b);
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// Adds `v` if it is independent; returns whether it was added.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.len, "length mismatch in EchelonBasis");
        let mut v = v.clone();
        self.reduce(&mut v);
        match v.first_one() {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&str]) -> BitMatrix {
        let vs: Vec<BitVec> = rows.iter().map(|r| BitVec::parse(r).unwrap()).collect();
        BitMatrix::from_rows(vs[0].len(), &vs)
    }

    /// Unpacked elimination on `Vec<Vec<bool>>`, independent of the packed path.
    fn naive_rank(m: &BitMatrix) -> usize {
        let mut a: Vec<Vec<bool>> = (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect())
            .collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            if let Some(p) = (rank..a.len()).find(|&r| a[r][c]) {
                a.swap(p, rank);
                for r in 0..a.len() {
                    if r != rank && a[r][c] {
                        for j in 0..m.cols() {
                            let v = a[rank][j];
                            a[r][j] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(5).rank(), 5);
        assert_eq!(BitMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(mat(&["1100", "0110", "1010"]).rank(), 2);
    }

    #[test]
    fn solve_examples() {
        let id = BitMatrix::identity(3);
        let b = BitVec::parse("101").unwrap();
        assert_eq!(id.solve_consistent(&b), Some(b.clone()));

        let z = BitMatrix::zeros(2, 2);
        assert_eq!(z.solve_consistent(&BitVec::parse("10").unwrap()), None);

        // x0+x1 = 1, x1+x2 = 1
        let a = mat(&["110", "011"]);
        let b = BitVec::parse("11").unwrap();
        let sols: Vec<BitVec> = (0..8u64)
            .map(|x| BitVec::from_words(3, vec![x]))
            .filter(|x| a.mul_vec(x) == b)
            .collect();
        assert_eq!(sols.len(), 2);
        let x = a.solve_consistent(&b).unwrap();
        assert!(sols.contains(&x));
        // free column is 2, forced to zero
        assert!(!x.get(2));
        assert_eq!(x, BitVec::parse("010").unwrap());
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(BitMatrix::identity(4).nullspace_basis().cols(), 0);
        let nb = BitMatrix::zeros(1, 3).nullspace_basis();
        assert_eq!((nb.rows(), nb.cols()), (3, 3));
        assert_eq!(nb.rank(), 3);

        let m = mat(&["111"]);
        let nb = m.nullspace_basis();
        assert_eq!(nb.cols(), 2);
        for j in 0..2 {
            let v = nb.column(j);
            assert_eq!(v.count_ones() % 2, 0);
            assert!(!v.is_zero());
        }
        assert!(m.mul(&nb).is_zero());
    }

    #[test]
    fn select_rows_examples() {
        let m = mat(&["10", "01", "11", "00"]);
        assert_eq!(m.select_rows(&[0, 1, 2, 3]).unwrap(), m);
        let empty = m.select_rows(&[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 2));
        assert_eq!(m.select_rows(&[1, 3]).unwrap(), mat(&["01", "00"]));
        assert!(m.select_rows(&[4]).is_err());
        assert!(m.select_rows(&[2, 1]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        while found < 20 {
            let a = BitMatrix::random(12, 12, &mut rng);
            match a.inverse() {
                Some(inv) => {
                    assert_eq!(a.mul(&inv), BitMatrix::identity(12));
                    found += 1;
                }
                None => assert!(a.rank() < 12),
            }
        }
    }

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVec::from_words(70, vec![u64::MAX, u64::MAX]);
        assert_eq!(v.count_ones(), 70);
        let m = BitMatrix::random(5, 70, &mut ChaCha8Rng::seed_from_u64(1));
        for r in 0..5 {
            assert_eq!(m.row_words(r)[1] >> 6, 0);
        }
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn echelon_basis_tracks_span() {
        let mut b = EchelonBasis::new(4);
        assert!(b.insert(&BitVec::parse("1100").unwrap()));
        assert!(b.insert(&BitVec::parse("0110").unwrap()));
        assert!(!b.insert(&BitVec::parse("1010").unwrap()));
        assert!(b.contains(&BitVec::parse("1010").unwrap()));
        assert!(!b.contains(&BitVec::parse("0001").unwrap()));
        assert_eq!(b.dimension(), 2);
    }

    proptest! {
        #[test]
        fn packed_rank_matches_naive(rows in 1usize..64, cols in 1usize..64, seed: u64) {
            let m = BitMatrix::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
            let r = m.rank();
            prop_assert_eq!(r, naive_rank(&m));
            prop_assert!(r <= rows.min(cols));
            prop_assert_eq!(m.rref().pivots.len(), r);
        }

        #[test]
        fn solve_recovers_consistent_rhs(rows in 1usize..40, cols in 1usize..40, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = BitMatrix::random(rows, cols, &mut rng);
            let x = BitVec::random(cols, &mut rng);
            let b = m.mul_vec(&x);
            let sol = m.solve_consistent(&b).expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&sol), b);
        }

        #[test]
        fn solve_reports_inconsistency_by_rank(rows in 1usize..20, cols in 1usize..20, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = BitMatrix::random(rows, cols, &mut rng);
            let b = BitVec::random(rows, &mut rng);
            let mut bm = BitMatrix::zeros(rows, 1);
            for r in 0..rows { bm.set(r, 0, b.get(r)); }
            let consistent = m.rank() == m.hstack(&bm).rank();
            prop_assert_eq!(m.solve_consistent(&b).is_some(), consistent);
        }

        #[test]
        fn nullspace_is_annihilated(rows in 1usize..48, cols in 1usize..48, seed: u64) {
            let m = BitMatrix::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
            let nb = m.nullspace_basis();
            prop_assert!(m.mul(&nb).is_zero());
            prop_assert_eq!(nb.cols(), cols - m.rank());
            prop_assert_eq!(nb.rank(), nb.cols());
        }
    }
}
