use std::fmt;

use rand::Rng;

use super::subspace::Subspace;
use super::vector::{mask, parity_and, words_for, BitVector, WORD};
use crate::error::{shape, Error, Result};

/// Dense row-major matrix over GF(2). Each row occupies `stride` 64-bit words,
/// column `j` of a row sits at bit `j % 64` of word `j / 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row-echelon form together with the row operations that produced it.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub reduced: BitMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// A matrix `inverse` with `source * inverse = I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightInverse {
    pub source: BitMatrix,
    pub inverse: BitMatrix,
}

impl RightInverse {
    /// `inverse^t * v`, the map that undoes `source^t` on its image.
    pub fn apply_transpose(&self, v: &BitVector) -> BitVector {
        self.inverse
            .transpose()
            .mul_vec(v)
            .expect("right inverse transpose shape")
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
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

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Parses rows written as 0/1 strings, e.g. `["101", "011"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitVector::len);
        Self::from_rows(cols, &parsed)
    }

    /// Block matrix where every entry of `pattern` is either the `n x n` zero
    /// block (0) or the `n x n` identity block (1).
    pub fn from_block_pattern(n: usize, pattern: &[&[u8]]) -> Self {
        let block_rows = pattern.len();
        let block_cols = pattern.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(block_rows * n, block_cols * n);
        for (bi, row) in pattern.iter().enumerate() {
            assert_eq!(row.len(), block_cols, "ragged block pattern");
            for (bj, &e) in row.iter().enumerate() {
                if e != 0 {
                    for k in 0..n {
                        m.set(bi * n + k, bj * n + k, true);
                    }
                }
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let words: Vec<u64> = (0..m.stride).map(|_| rng.random()).collect();
            let v = BitVector::from_words(cols, words);
            m.row_words_mut(i).copy_from_slice(v.words());
        }
        m
    }

    /// Uniformly random invertible matrix (rejection sampling).
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "({i},{j}) out of range");
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(i < self.rows && j < self.cols, "({i},{j}) out of range");
        let w = &mut self.data[i * self.stride + j / WORD];
        let m = 1u64 << (j % WORD);
        if bit {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_bits((0..self.rows).map(|i| self.get(i, j)))
    }

    /// Rows as single-word masks; only meaningful when `cols <= 64`.
    pub fn row_masks(&self) -> Vec<u64> {
        assert!(self.cols <= WORD, "row masks need at most 64 columns");
        (0..self.rows)
            .map(|i| self.row_words(i).first().copied().unwrap_or(0))
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// row[dst] ^= row[src], touching words from `from_word` on.
    fn xor_row_into(&mut self, src: usize, dst: usize, from_word: usize) {
        let s = self.stride;
        let (src_off, dst_off) = (src * s, dst * s);
        for k in from_word..s {
            let w = self.data[src_off + k];
            self.data[dst_off + k] ^= w;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            let row = self.row_words(i);
            for (wi, &w) in row.iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let j = wi * WORD + bits.trailing_zeros() as usize;
                    t.data[j * t.stride + i / WORD] |= 1 << (i % WORD);
                    bits &= bits - 1;
                }
            }
        }
        t
    }

    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitMatrix { data, ..*self })
    }

    /// Exact product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = self.row_words(i);
            let dst = i * out.stride;
            for (wi, &w) in row.iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let k = wi * WORD + bits.trailing_zeros() as usize;
                    let src = other.row_words(k);
                    for (d, s) in out.data[dst..dst + out.stride].iter_mut().zip(src) {
                        *d ^= s;
                    }
                    bits &= bits - 1;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(shape(format!(
                "cannot apply {}x{} matrix to a {}-bit vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(BitVector::from_bits(
            (0..self.rows).map(|i| parity_and(self.row_words(i), v.words())),
        ))
    }

    pub fn pow(&self, e: usize) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(shape("power of a non-square matrix"));
        }
        let mut result = BitMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(result)
    }

    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(shape("hstack of matrices with different row counts"));
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(i, j, true);
                }
            }
            for j in 0..other.cols {
                if other.get(i, j) {
                    out.set(i, self.cols + j, true);
                }
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(shape("vstack of matrices with different column counts"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    pub fn block_diag(blocks: &[&BitMatrix]) -> BitMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = BitMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    if b.get(i, j) {
                        out.set(r0 + i, c0 + j, true);
                    }
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Gauss-Jordan elimination restricted to pivots in columns `< pivot_limit`.
    fn eliminate(&mut self, pivot_limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_limit.min(self.cols) {
            if r == self.rows {
                break;
            }
            let (wi, bit) = (c / WORD, 1u64 << (c % WORD));
            let Some(p) = (r..self.rows).find(|&i| self.data[i * self.stride + wi] & bit != 0)
            else {
                continue;
            };
            self.swap_rows(p, r);
            for i in 0..self.rows {
                if i != r && self.data[i * self.stride + wi] & bit != 0 {
                    self.xor_row_into(r, i, wi);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Unique reduced row-echelon form, rank and pivot columns.
    pub fn rref(&self) -> Echelon {
        let mut reduced = self.clone();
        let pivots = reduced.eliminate(self.cols);
        Echelon {
            rank: pivots.len(),
            reduced,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// `{v : self * v = 0}`.
    pub fn kernel(&self) -> Subspace {
        let Echelon {
            reduced, pivots, ..
        } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis: Vec<BitVector> = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::unit(self.cols, f);
                for (i, &p) in pivots.iter().enumerate() {
                    if reduced.get(i, f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.cols, &basis).expect("kernel vectors have matrix width")
    }

    pub fn row_space(&self) -> Subspace {
        Subspace::from_matrix(self)
    }

    /// Whether `v` is a GF(2) combination of the rows.
    pub fn rowspace_contains(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(self.row_space().contains(v))
    }

    pub fn invert(&self) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(shape(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = self.hstack(&BitMatrix::identity(n))?;
        let pivots = aug.eliminate(n);
        if pivots.len() < n {
            return Err(Error::Singular {
                size: n,
                rank: pivots.len(),
            });
        }
        Ok(BitMatrix::from_fn(n, n, |i, j| aug.get(i, n + j)))
    }

    /// A matrix `R` with `self * R = I`.
    ///
    /// In pivot form the solution sits on the pivot rows and the remaining rows are
    /// zero: after column permutation `self = E^{-1} [I | U]`, `R` stacks `E` over a
    /// zero block, so the free block `Y` satisfies `U Y = 0`. Otherwise the
    /// symmetric solution `self^t (self self^t)^{-1}` is used when it exists.
    pub fn right_inverse(&self, prefer_pivot_form: bool) -> Result<RightInverse> {
        let (k, l) = (self.rows, self.cols);
        if k > l {
            return Err(shape(format!(
                "right inverse needs cols >= rows, got {k}x{l}"
            )));
        }
        if !prefer_pivot_form {
            let gram = self.mul(&self.transpose())?;
            if let Ok(gram_inv) = gram.invert() {
                let inverse = self.transpose().mul(&gram_inv)?;
                return Ok(RightInverse {
                    source: self.clone(),
                    inverse,
                });
            }
        }
        let mut aug = self.hstack(&BitMatrix::identity(k))?;
        let pivots = aug.eliminate(l);
        if pivots.len() < k {
            return Err(Error::RankDeficient {
                rows: k,
                rank: pivots.len(),
            });
        }
        let mut inverse = BitMatrix::zeros(l, k);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..k {
                if aug.get(i, l + j) {
                    inverse.set(p, j, true);
                }
            }
        }
        debug_assert!(self.mul(&inverse).unwrap().is_identity());
        Ok(RightInverse {
            source: self.clone(),
            inverse,
        })
    }

    /// Matrix text format: `rows cols` then one 0/1 line per row, column 0 leftmost.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            s.push_str(&self.row(i).to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the matrix text format from consecutive lines. `first_line` is the
    /// 1-based line number of the header, used in error messages. Returns the
    /// matrix and the number of lines consumed.
    pub fn parse_lines<'a, I>(lines: &mut I, first_line: usize) -> Result<(BitMatrix, usize)>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines.next().ok_or(Error::Parse {
            line: first_line,
            msg: "missing matrix header `rows cols`".into(),
        })?;
        let dims: Vec<&str> = header.split(' ').collect();
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: first_line,
                msg: format!("bad matrix header '{header}'"),
            })
        };
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: first_line,
                msg: format!("matrix header must be `rows cols`, got '{header}'"),
            });
        }
        let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        let mut m = BitMatrix::zeros(rows, cols);
        for i in 0..rows {
            let line_no = first_line + 1 + i;
            let line = lines.next().ok_or(Error::Parse {
                line: line_no,
                msg: format!("expected {rows} matrix rows, found {i}"),
            })?;
            if line.len() != cols {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("row has {} characters, expected {cols}", line.len()),
                });
            }
            let v = line.parse::<BitVector>().map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            m.row_words_mut(i).copy_from_slice(v.words());
        }
        Ok((m, rows + 1))
    }

    pub fn from_text(text: &str) -> Result<BitMatrix> {
        let mut lines = text.lines();
        let (m, _) = Self::parse_lines(&mut lines, 1)?;
        if let Some(extra) = lines.find(|l| !l.is_empty()) {
            return Err(Error::Parse {
                line: m.rows + 2,
                msg: format!("trailing content '{extra}'"),
            });
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Multiplies a row-mask matrix (rows packed as `u64`) by a packed vector.
#[inline]
pub fn apply_row_masks(rows: &[u64], x: u64) -> u64 {
    rows.iter().enumerate().fold(0, |acc, (i, r)| {
        acc | (((r & x).count_ones() as u64 & 1) << i)
    })
}

/// Sum of the rows selected by the set bits of `sel`.
#[inline]
pub fn combine_row_masks(rows: &[u64], sel: u64) -> u64 {
    let mut acc = 0;
    let mut bits = sel & mask(rows.len());
    while bits != 0 {
        acc ^= rows[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_strs(rows).unwrap()
    }

    #[test]
    fn identity_times_identity() {
        let i2 = BitMatrix::identity(2);
        assert_eq!(i2.mul(&i2).unwrap(), i2);
    }

    #[test]
    fn one_plus_one_is_zero() {
        let p = m(&["11"]).mul(&m(&["1", "1"])).unwrap();
        assert_eq!(p, m(&["0"]));
    }

    #[test]
    fn feistel_a_times_b_transpose_vanishes() {
        for n in 1..=4 {
            let a = BitMatrix::from_block_pattern(n, &[&[1, 0]]);
            let b = BitMatrix::from_block_pattern(n, &[&[0, 1]]);
            assert!(a.mul(&b.transpose()).unwrap().is_zero());
        }
    }

    #[test]
    fn mul_shape_error() {
        assert!(matches!(m(&["11"]).mul(&m(&["11"])), Err(Error::Shape(_))));
    }

    #[test]
    fn rref_examples() {
        let e = m(&["11", "01"]).rref();
        assert_eq!((e.rank, e.pivots.clone()), (2, vec![0, 1]));
        assert!(e.reduced.is_identity());

        let e = BitMatrix::zeros(3, 4).rref();
        assert_eq!(e.rank, 0);
        assert!(e.pivots.is_empty());

        let e = m(&["101", "101"]).rref();
        assert_eq!(e.rank, 1);
        assert_eq!(e.reduced.row(0).to_string(), "101");
        assert!(e.reduced.row(1).is_zero());
    }

    #[test]
    fn kernel_examples() {
        let k = m(&["11"]).kernel();
        assert_eq!(k.basis().row_vectors(), vec!["11".parse().unwrap()]);

        let k = m(&["10"]).kernel();
        assert_eq!(k.basis().row_vectors(), vec!["01".parse().unwrap()]);

        assert_eq!(m(&["11", "01"]).kernel().dim(), 0);
    }

    #[test]
    fn rowspace_membership() {
        let a = m(&["11"]);
        assert!(a.rowspace_contains(&"00".parse().unwrap()).unwrap());
        assert!(!a.rowspace_contains(&"10".parse().unwrap()).unwrap());
        assert!(a.rowspace_contains(&"11".parse().unwrap()).unwrap());
        assert!(a.rowspace_contains(&"1".parse().unwrap()).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert!(BitMatrix::identity(5).invert().unwrap().is_identity());
        let swap = m(&["01", "10"]);
        assert_eq!(swap.invert().unwrap(), swap);
        let u = m(&["11", "01"]);
        assert_eq!(u.invert().unwrap(), u);
        assert!(u.mul(&u).unwrap().is_identity());
        match m(&["11", "11"]).invert() {
            Err(Error::Singular { size: 2, rank: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn right_inverse_pivot_form() {
        // [I | U] gives R^t = [I | 0].
        let g = m(&["1011", "0110"]);
        let r = g.right_inverse(true).unwrap();
        assert_eq!(r.inverse, m(&["10", "01", "00", "00"]));
        assert!(g.mul(&r.inverse).unwrap().is_identity());

        // [1 1]: pivot column 0 is chosen.
        let r = m(&["11"]).right_inverse(true).unwrap();
        assert_eq!(r.inverse, m(&["1", "0"]));

        // Feistel B = [0 1].
        let r = m(&["01"]).right_inverse(true).unwrap();
        assert_eq!(r.inverse, m(&["0", "1"]));
    }

    #[test]
    fn right_inverse_candidates_for_one_one() {
        // Enumerate all four 2x1 candidates; exactly (1,0) and (0,1) work.
        let g = m(&["11"]);
        let good: Vec<String> = (0..4u64)
            .map(|c| BitMatrix::from_fn(2, 1, |i, _| (c >> i) & 1 == 1))
            .filter(|r| g.mul(r).unwrap().is_identity())
            .map(|r| r.column(0).to_string())
            .collect();
        assert_eq!(good, vec!["10", "01"]);
        let r = g.right_inverse(false).unwrap();
        assert!(good.contains(&r.inverse.column(0).to_string()));
    }

    #[test]
    fn right_inverse_rank_error() {
        assert!(matches!(
            m(&["11", "11"]).right_inverse(true),
            Err(Error::RankDeficient { rows: 2, rank: 1 })
        ));
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let a = m(&["101", "010"]);
        assert_eq!(a.to_text(), "2 3\n101\n010\n");
        assert_eq!(BitMatrix::from_text(&a.to_text()).unwrap(), a);
        assert!(matches!(
            BitMatrix::from_text("2 3\n101\n01\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(BitMatrix::from_text("2 3\n101\n0120\n").is_err());
        assert!(BitMatrix::from_text("2  3\n101\n010\n").is_err());
    }

    #[test]
    fn packed_helpers_agree_with_mul_vec() {
        let a = m(&["1101", "0110", "1000"]);
        let masks = a.row_masks();
        for x in 0..16u64 {
            let v = BitVector::from_u64(4, x);
            assert_eq!(apply_row_masks(&masks, x), a.mul_vec(&v).unwrap().to_u64());
        }
        let at = a.transpose();
        for y in 0..8u64 {
            let v = BitVector::from_u64(3, y);
            assert_eq!(
                combine_row_masks(&masks, y),
                at.mul_vec(&v).unwrap().to_u64()
            );
        }
    }
}
