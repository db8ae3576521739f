//! Bit vectors and lower-triangular Toeplitz matrices over GF(2).
//!
//! Level 1 is the most significant bit. A gain `g` in (1, 2] with binary
//! expansion `1.[g]_1 [g]_2 ...` acts on an `n`-level input as the
//! lower-triangular Toeplitz matrix whose first column is
//! `(1, [g]_1, ..., [g]_{n-1})`. Multiplication only moves bits
//! downwards, so the leading index of a vector is preserved.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Gain;

/// Fixed-length bit vector, word packed. Bit `i` (1-based) lives at
/// position `(i - 1) % 64` of word `(i - 1) / 64`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 1..=len {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            v.set(k + 1, b);
        }
        v
    }

    /// Parses `0`/`1` digits, MSB first. Other characters are ignored.
    pub fn from_bit_str(s: &str) -> Self {
        let bits: Vec<bool> = s
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        Self::from_bools(&bits)
    }

    /// The `len`-bit big-endian representation of `value`: level 1 holds
    /// bit `len - 1` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 1..=len {
            let shift = len - i;
            if shift < 64 && (value >> shift) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Inverse of [`BitVec::from_u64`] for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 needs len <= 64");
        (1..=self.len).fold(0, |acc, i| (acc << 1) | u64::from(self.get(i)))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = rng.random();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        (self.words[(i - 1) / 64] >> ((i - 1) % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        let mask = 1u64 << ((i - 1) % 64);
        let w = &mut self.words[(i - 1) / 64];
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Smallest index holding a one; `None` stands for the zero vector,
    /// whose leading index is taken to be infinite.
    pub fn leading_index(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize + 1)
    }

    /// Moves every bit `k` levels towards the LSB, dropping what falls off
    /// the end and filling the top with zeros. Length is unchanged.
    pub fn shifted_down(&self, k: usize) -> BitVec {
        let mut out = BitVec::zeros(self.len);
        if k >= self.len {
            return out;
        }
        let (word_shift, bit_shift) = (k / 64, k % 64);
        for (src, &w) in self.words.iter().enumerate() {
            let dst = src + word_shift;
            if dst >= out.words.len() {
                break;
            }
            out.words[dst] |= w << bit_shift;
            if bit_shift != 0 && dst + 1 < out.words.len() {
                out.words[dst + 1] |= w >> (64 - bit_shift);
            }
        }
        out.mask_tail();
        out
    }

    /// `(0_k ; self)` truncated or padded so the result has `len` levels.
    pub fn embed(&self, offset: usize, len: usize) -> BitVec {
        let mut out = BitVec::zeros(len);
        for i in 1..=self.len {
            if self.get(i) && i + offset <= len {
                out.set(i + offset, true);
            }
        }
        out
    }

    /// Levels `from ..= from + count - 1` as a new vector.
    pub fn slice(&self, from: usize, count: usize) -> BitVec {
        let mut out = BitVec::zeros(count);
        for k in 0..count {
            if self.get(from + k) {
                out.set(k + 1, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Binary lower-triangular Toeplitz matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LowerToeplitz {
    first_column: BitVec,
}

impl LowerToeplitz {
    pub fn new(first_column: BitVec) -> Result<Self> {
        if first_column.is_empty() {
            return Err(Error::InvalidParameter("Toeplitz dimension must be at least 1".into()));
        }
        if !first_column.get(1) {
            return Err(Error::InvalidParameter("Toeplitz diagonal must be 1".into()));
        }
        Ok(Self { first_column })
    }

    pub fn identity(n: usize) -> Self {
        let mut c = BitVec::zeros(n);
        c.set(1, true);
        Self { first_column: c }
    }

    /// Matrix of the gain `g` at `n` levels.
    pub fn from_gain<G: Gain>(g: &G, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Toeplitz dimension must be at least 1".into()));
        }
        let frac = g.fraction_bits(n - 1)?;
        let mut bits = Vec::with_capacity(n);
        bits.push(true);
        bits.extend(frac);
        Ok(Self { first_column: BitVec::from_bools(&bits) })
    }

    pub fn dim(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &BitVec {
        &self.first_column
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        i >= j && self.first_column.get(i - j + 1)
    }

    /// Column `j`: the first column moved down by `j - 1` levels.
    pub fn column(&self, j: usize) -> BitVec {
        self.first_column.shifted_down(j - 1)
    }

    pub fn matvec(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        let mut y = BitVec::zeros(self.dim());
        for j in 1..=x.len() {
            if x.get(j) {
                y.xor_assign(&self.column(j));
            }
        }
        Ok(y)
    }
}

/// Convenience wrapper over [`LowerToeplitz::from_gain`].
pub fn toeplitz_from_gain<G: Gain>(g: &G, n: usize) -> Result<LowerToeplitz> {
    LowerToeplitz::from_gain(g, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("columns are linearly dependent")]
    NotUnique,
    #[error("right-hand side is outside the column span")]
    NoSolution,
}

/// Linear system `sum_k c_k col_k = rhs` over GF(2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2System {
    columns: Vec<BitVec>,
    rhs: BitVec,
}

/// Incremental echelon basis. Each stored vector has a distinct leading
/// index and carries the combination of inputs that produced it.
struct Echelon {
    rows: Vec<(usize, BitVec, BitVec)>,
    inputs: usize,
}

impl Echelon {
    fn new(inputs: usize) -> Self {
        Self { rows: Vec::new(), inputs }
    }

    /// Reduces `v`; returns the residual and the combination that was used.
    fn reduce(&self, mut v: BitVec) -> (BitVec, BitVec) {
        let mut combo = BitVec::zeros(self.inputs);
        for (pivot, row, row_combo) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(row);
                combo.xor_assign(row_combo);
            }
        }
        (v, combo)
    }

    /// Inserts input `k`; false when it is dependent on earlier ones.
    fn insert(&mut self, k: usize, v: BitVec) -> bool {
        let (residual, mut combo) = self.reduce(v);
        let Some(pivot) = residual.leading_index() else {
            return false;
        };
        combo.set(k + 1, !combo.get(k + 1));
        let at = self.rows.partition_point(|(p, _, _)| *p < pivot);
        self.rows.insert(at, (pivot, residual, combo));
        true
    }
}

impl Gf2System {
    pub fn new(columns: Vec<BitVec>, rhs: BitVec) -> Result<Self> {
        let n = rhs.len();
        if columns.len() > n {
            return Err(Error::InvalidParameter(format!(
                "{} columns exceed dimension {n}",
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::Dimension { expected: n, got: c.len() });
        }
        Ok(Self { columns, rhs })
    }

    pub fn columns(&self) -> &[BitVec] {
        &self.columns
    }

    pub fn rhs(&self) -> &BitVec {
        &self.rhs
    }

    /// `sum_k c_k col_k`.
    pub fn forward(&self, c: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rhs.len());
        for (k, col) in self.columns.iter().enumerate() {
            if c.get(k + 1) {
                out.xor_assign(col);
            }
        }
        out
    }

    pub fn solve_unique(&self) -> std::result::Result<BitVec, SolveError> {
        let mut basis = Echelon::new(self.columns.len());
        for (k, col) in self.columns.iter().enumerate() {
            if !basis.insert(k, col.clone()) {
                return Err(SolveError::NotUnique);
            }
        }
        // Each basis row equals the sum of the inputs flagged in its combo.
        let mut residual = self.rhs.clone();
        let mut coeffs = BitVec::zeros(self.columns.len());
        for (pivot, row, combo) in &basis.rows {
            if residual.get(*pivot) {
                residual.xor_assign(row);
                coeffs.xor_assign(combo);
            }
        }
        if residual.is_zero() {
            Ok(coeffs)
        } else {
            Err(SolveError::NoSolution)
        }
    }
}

pub fn solve_unique(sys: &Gf2System) -> std::result::Result<BitVec, SolveError> {
    sys.solve_unique()
}

pub fn rank(columns: &[BitVec]) -> usize {
    let mut basis = Echelon::new(columns.len());
    columns
        .iter()
        .enumerate()
        .filter(|(k, c)| basis.insert(*k, (*c).clone()))
        .count()
}

pub fn leading_index(x: &BitVec) -> Option<usize> {
    x.leading_index()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_one_matrix() {
        let m = toeplitz_from_gain(&1.3125, 4).unwrap();
        assert_eq!(m.first_column().to_string(), "1010");
        let y = m.matvec(&BitVec::from_bit_str("1010")).unwrap();
        assert_eq!(y.to_string(), "1000");
    }

    #[test]
    fn two_is_all_ones() {
        let m = toeplitz_from_gain(&2.0, 3).unwrap();
        assert_eq!(m.first_column().to_string(), "111");
    }

    #[test]
    fn domain_errors() {
        assert!(toeplitz_from_gain(&1.0, 4).is_err());
        assert!(toeplitz_from_gain(&2.5, 4).is_err());
        assert!(toeplitz_from_gain(&1.5, 0).is_err());
        assert!(toeplitz_from_gain(&f64::NAN, 3).is_err());
    }

    #[test]
    fn shift_across_words() {
        let mut v = BitVec::zeros(130);
        v.set(1, true);
        v.set(63, true);
        v.set(64, true);
        let s = v.shifted_down(66);
        let ones: Vec<usize> = (1..=130).filter(|&i| s.get(i)).collect();
        assert_eq!(ones, vec![67, 129, 130]);
        assert!(v.shifted_down(130).is_zero());
    }

    #[test]
    fn leading_index_examples() {
        assert_eq!(leading_index(&BitVec::from_bit_str("0010")), Some(3));
        assert_eq!(leading_index(&BitVec::zeros(5)), None);
        assert_eq!(leading_index(&BitVec::from_bit_str("111")), Some(1));
    }

    #[test]
    fn solve_identity_and_dependent() {
        let cols: Vec<BitVec> = ["100", "010", "001"].iter().map(|s| BitVec::from_bit_str(s)).collect();
        let sys = Gf2System::new(cols, BitVec::from_bit_str("101")).unwrap();
        assert_eq!(sys.solve_unique().unwrap().to_string(), "101");

        let c = BitVec::from_bit_str("110");
        let sys = Gf2System::new(vec![c.clone(), c], BitVec::from_bit_str("110")).unwrap();
        assert_eq!(sys.solve_unique(), Err(SolveError::NotUnique));

        let sys = Gf2System::new(vec![BitVec::from_bit_str("110")], BitVec::from_bit_str("001")).unwrap();
        assert_eq!(sys.solve_unique(), Err(SolveError::NoSolution));
    }

    #[test]
    fn rank_of_empty_is_zero() {
        assert_eq!(rank(&[]), 0);
    }

    #[test]
    fn u64_roundtrip() {
        let v = BitVec::from_u64(0b1011, 4);
        assert_eq!(v.to_string(), "1011");
        assert_eq!(v.to_u64(), 0b1011);
    }
}
