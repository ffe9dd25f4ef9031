//! Linear algebra over the binary field.
//!
//! Entropies of XOR functions of independent uniform bits are ranks here:
//! `H(target | given) = rank([target; given]) - rank(given)`.

use std::fmt;

use crate::{Error, Result};

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of `0`/`1` characters; bit 0 is the leftmost.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::arg(format!("invalid bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// Lowest set bit strictly below `limit`.
    pub fn first_one_below(&self, limit: usize) -> Option<usize> {
        self.first_one().filter(|&i| i < limit)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        let mut out = BitVector::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn write_at(&mut self, start: usize, bits: &BitVector) {
        for i in 0..bits.len() {
            self.set(start + i, bits.get(i));
        }
    }

    pub fn concat(parts: &[&BitVector]) -> BitVector {
        let total = parts.iter().map(|p| p.len()).sum();
        let mut out = BitVector::zeros(total);
        let mut at = 0;
        for p in parts {
            out.write_at(at, p);
            at += p.len();
        }
        out
    }

    /// Copy extended (or truncated) to `len` bits.
    pub fn resized(&self, len: usize) -> BitVector {
        let mut out = BitVector::zeros(len);
        for i in self.iter_ones().take_while(|&i| i < len) {
            out.set(i, true);
        }
        out
    }

    /// Big-endian hex: bit 0 is the most significant bit of the first digit.
    pub fn to_hex(&self) -> String {
        (0..self.len.div_ceil(4))
            .map(|d| {
                let nibble = (0..4)
                    .filter(|&j| 4 * d + j < self.len && self.get(4 * d + j))
                    .fold(0u32, |acc, j| acc | 8 >> j);
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`BitVector::to_hex`]; padding bits beyond `len` must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::arg(format!(
                "hex string {hex:?} has {} digits, expected {} for {len} bits",
                hex.len(),
                len.div_ceil(4)
            )));
        }
        let mut v = BitVector::zeros(len);
        for (d, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::arg(format!("invalid hex digit {c:?}")))?;
            for j in 0..4 {
                if nibble & (8 >> j) != 0 {
                    let i = 4 * d + j;
                    if i >= len {
                        return Err(Error::arg(format!("hex string {hex:?} sets padding bit {i}")));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

/// A dense matrix over GF(2), stored by rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                expected: cols,
                actual: bad.len(),
            });
        }
        Ok(BitMatrix { cols, rows })
    }

    /// Rows given as `0`/`1` strings, e.g. `["110", "011"]`.
    pub fn from_bit_strs(cols: usize, rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|s| BitVector::from_bit_str(s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(cols, rows)
    }

    /// Unit rows selecting the given columns.
    pub fn selector<I: IntoIterator<Item = usize>>(cols: usize, columns: I) -> Self {
        BitMatrix {
            cols,
            rows: columns.into_iter().map(|c| BitVector::unit(cols, c)).collect(),
        }
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    /// `self` on top of `other`.
    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix { cols: self.cols, rows })
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols);
        self.rows.iter().filter(|r| basis.insert(r)).count()
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            out.set(i, r.dot(x));
        }
        out
    }

    /// Reduced row echelon form with zero rows dropped; a canonical
    /// representative of the row space.
    pub fn rref(&self) -> BitMatrix {
        let mut rows: Vec<BitVector> = Vec::new();
        let mut basis = EchelonBasis::new(self.cols);
        for r in &self.rows {
            if basis.insert(r) {
                rows.push(basis.rows.last().unwrap().clone());
            }
        }
        // back-substitute so every pivot column is a unit column
        rows.sort_by_key(|r| r.first_one());
        for i in (0..rows.len()).rev() {
            let p = rows[i].first_one().unwrap();
            let pivot_row = rows[i].clone();
            for j in 0..i {
                if rows[j].get(p) {
                    rows[j].xor_assign(&pivot_row);
                }
            }
        }
        BitMatrix { cols: self.cols, rows }
    }
}

/// Rank of a matrix over GF(2).
pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

/// `rank([target; given]) - rank(given)`: the conditional entropy, in bits, of
/// the target linear functions given the conditioning ones, for i.i.d.
/// uniform inputs.
pub fn conditional_rank(target: &BitMatrix, given: &BitMatrix) -> Result<usize> {
    if target.cols != given.cols {
        return Err(Error::Dimension {
            expected: given.cols,
            actual: target.cols,
        });
    }
    let mut basis = EchelonBasis::new(given.cols);
    for r in &given.rows {
        basis.insert(r);
    }
    Ok(target.rows.iter().filter(|r| basis.insert(r)).count())
}

/// An incrementally built echelon basis of a row space.
///
/// Each stored row is reduced against the earlier ones, so a single pass in
/// insertion order reduces any vector. Optionally every stored row carries a
/// tag recording which inserted vectors it combines.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
    tags: Vec<BitVector>,
    inserted: usize,
    tag_len: usize,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        Self::with_tags(cols, 0)
    }

    /// A basis that tracks combinations of up to `max_inserts` inserted rows.
    pub fn with_tags(cols: usize, max_inserts: usize) -> Self {
        EchelonBasis {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
            tags: Vec::new(),
            inserted: 0,
            tag_len: max_inserts,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    fn reduce_tagged(&self, v: &BitVector, tag: &mut Option<BitVector>) -> BitVector {
        let mut r = v.clone();
        for (i, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if r.get(p) {
                r.xor_assign(row);
                if let Some(t) = tag.as_mut() {
                    t.xor_assign(&self.tags[i]);
                }
            }
        }
        r
    }

    /// Residual of `v` after elimination; zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        self.reduce_tagged(v, &mut None)
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns whether it increased the rank.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.cols, "row length differs from basis width");
        let tracking = self.tag_len > 0;
        let mut tag = if tracking {
            assert!(self.inserted < self.tag_len, "tag capacity exhausted");
            Some(BitVector::unit(self.tag_len, self.inserted))
        } else {
            None
        };
        self.inserted += 1;
        let r = self.reduce_tagged(v, &mut tag);
        match r.first_one() {
            Some(p) => {
                self.rows.push(r);
                self.pivots.push(p);
                if let Some(t) = tag {
                    self.tags.push(t);
                }
                true
            }
            None => false,
        }
    }

    /// Which inserted rows XOR to `v`, as a tag over insertion indices.
    /// `None` when `v` is outside the span. Requires a tagged basis.
    pub fn combination(&self, v: &BitVector) -> Option<BitVector> {
        assert!(self.tag_len > 0, "combination() needs a tagged basis");
        let mut tag = Some(BitVector::zeros(self.tag_len));
        let r = self.reduce_tagged(v, &mut tag);
        r.is_zero().then(|| tag.unwrap())
    }
}

/// Known linear equations `row · x = value` over GF(2), used to decide which
/// unknown bits are determined and to read off their values.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    unknowns: usize,
    basis: EchelonBasis,
}

impl LinearSystem {
    pub fn new(unknowns: usize) -> Self {
        LinearSystem {
            unknowns,
            basis: EchelonBasis::new(unknowns + 1),
        }
    }

    /// Adds `row · x = value`. Returns an error if it contradicts earlier equations.
    pub fn add_equation(&mut self, row: &BitVector, value: bool) -> Result<()> {
        if row.len() != self.unknowns {
            return Err(Error::Dimension {
                expected: self.unknowns,
                actual: row.len(),
            });
        }
        let mut aug = row.resized(self.unknowns + 1);
        aug.set(self.unknowns, value);
        let r = self.basis.reduce(&aug);
        if r.first_one_below(self.unknowns).is_none() && r.get(self.unknowns) {
            return Err(Error::Decode("inconsistent linear equations".into()));
        }
        self.basis.insert(&aug);
        Ok(())
    }

    /// Value of `row · x` if it is determined by the equations so far.
    pub fn evaluate(&self, row: &BitVector) -> Option<bool> {
        let aug = row.resized(self.unknowns + 1);
        let r = self.basis.reduce(&aug);
        r.first_one_below(self.unknowns)
            .is_none()
            .then(|| r.get(self.unknowns))
    }
}
