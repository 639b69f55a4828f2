//! Dense bit-packed linear algebra over GF(2).

mod alist;

pub use alist::{read_alist, write_alist, AlistError};

use std::fmt;

use thiserror::Error;

use crate::affine::{AffineError, AffinePerm};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("block grid is not rectangular")]
    RaggedGrid,
    #[error(transparent)]
    Affine(#[from] AffineError),
}

fn check_dim(expected: usize, got: usize) -> Result<(), Gf2Error> {
    if expected != got {
        return Err(Gf2Error::Dimension { expected, got });
    }
    Ok(())
}

/// A bit vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinVector {
    len: usize,
    words: Vec<u64>,
}

impl BinVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    fn from_words(len: usize, words: Vec<u64>) -> Self {
        let mut v = Self { len, words };
        v.clear_padding();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BinVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BinVector) -> BinVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BinVector) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            & 1
            == 1
    }

    /// Indices of the set bits in increasing order.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                out.push(wi * WORD + t);
                w &= w - 1;
            }
        }
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BinVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinVector(len={}, support={:?})", self.len, self.support())
    }
}

/// One cell of a permutation block grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Zero,
    Perm(AffinePerm),
    /// The transpose of the permutation matrix, i.e. the matrix of the inverse map.
    Transposed(AffinePerm),
}

impl Block {
    /// The map realised by the block, if any.
    pub fn map(&self) -> Option<AffinePerm> {
        match *self {
            Block::Zero => None,
            Block::Perm(f) => Some(f),
            Block::Transposed(f) => Some(f.invert()),
        }
    }
}

/// Result of solving `M x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(BinVector),
    /// Consistent with `free` free columns; `particular` is one solution.
    Multiple {
        particular: BinVector,
        free: usize,
    },
    Inconsistent,
}

/// Dense row-major bit matrix. Padding bits past `cols` are always zero.
#[derive(Clone, PartialEq, Eq)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinMatrix({}x{}, weight={})", self.rows, self.cols, self.weight())
    }
}

impl BinMatrix {
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

    pub fn from_rows(cols: usize, rows: &[BinVector]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            check_dim(cols, r.len())?;
            m.row_words_mut(i).copy_from_slice(&r.words);
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Expands a grid of `P x P` permutation blocks.
    pub fn from_perm_blocks(grid: &[Vec<Block>], p: usize) -> Result<Self, Gf2Error> {
        let block_cols = grid.first().map_or(0, Vec::len);
        if grid.iter().any(|r| r.len() != block_cols) {
            return Err(Gf2Error::RaggedGrid);
        }
        let mut m = Self::zeros(grid.len() * p, block_cols * p);
        for (bi, row) in grid.iter().enumerate() {
            for (bj, block) in row.iter().enumerate() {
                let Some(map) = block.map() else { continue };
                if map.modulus() as usize != p {
                    return Err(AffineError::ModulusMismatch(p as u64, map.modulus()).into());
                }
                for x in 0..p {
                    let y = map.apply(x as u64) as usize;
                    m.flip(bi * p + x, bj * p + y);
                }
            }
        }
        Ok(m)
    }

    /// The `P x P` matrix of a single permutation.
    pub fn from_perm(f: &AffinePerm) -> Self {
        Self::from_perm_blocks(&[vec![Block::Perm(*f)]], f.modulus() as usize).expect("single block is consistent")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.stride + j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let mask = 1u64 << (j % WORD);
        let w = &mut self.data[i * self.stride + j / WORD];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        self.data[i * self.stride + j / WORD] ^= 1u64 << (j % WORD);
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BinVector {
        BinVector::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn row_support(&self, i: usize) -> Vec<usize> {
        BinVector::from_words(self.cols, self.row_words(i).to_vec()).support()
    }

    pub fn column(&self, j: usize) -> BinVector {
        let mut v = BinVector::zeros(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn weight(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| self.row_words(i).iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            for j in self.row_support(i) {
                out[j] += 1;
            }
        }
        out
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.row_support(i) {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Copy of `M[rows, cols]` with the given index order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> BinMatrix {
        let mut m = BinMatrix::zeros(rows.len(), cols.len());
        for (ni, &i) in rows.iter().enumerate() {
            for (nj, &j) in cols.iter().enumerate() {
                if self.get(i, j) {
                    m.set(ni, nj, true);
                }
            }
        }
        m
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> BinMatrix {
        BinMatrix {
            rows: end - start,
            cols: self.cols,
            stride: self.stride,
            data: self.data[start * self.stride..end * self.stride].to_vec(),
        }
    }

    /// Sub-block `[r0..r0+h, c0..c0+w]`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> BinMatrix {
        let rows: Vec<usize> = (r0..r0 + h).collect();
        let cols: Vec<usize> = (c0..c0 + w).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn mul(&self, other: &BinMatrix) -> Result<BinMatrix, Gf2Error> {
        check_dim(self.cols, other.rows)?;
        let mut out = BinMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let support = self.row_support(i);
            let dst = &mut out.data[i * out.stride..(i + 1) * out.stride];
            for k in support {
                for (d, s) in dst.iter_mut().zip(other.row_words(k)) {
                    *d ^= s;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BinVector) -> Result<BinVector, Gf2Error> {
        check_dim(self.cols, v.len())?;
        let mut out = BinVector::zeros(self.rows);
        for i in 0..self.rows {
            let parity = self
                .row_words(i)
                .iter()
                .zip(&v.words)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                & 1;
            if parity == 1 {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `v^T M`: XOR of the rows selected by `v`.
    pub fn left_mul_vec(&self, v: &BinVector) -> Result<BinVector, Gf2Error> {
        check_dim(self.rows, v.len())?;
        let mut out = BinVector::zeros(self.cols);
        for i in v.support() {
            for (d, s) in out.words.iter_mut().zip(self.row_words(i)) {
                *d ^= s;
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &BinMatrix) -> Result<BinMatrix, Gf2Error> {
        check_dim(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BinMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// In-place reduced row echelon form over the first `pivot_cols` columns.
    /// Returns the pivot columns; pivot `k` sits in row `k`.
    fn rref(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..pivot_cols {
            if next == self.rows {
                break;
            }
            let (w, bit) = (c / WORD, 1u64 << (c % WORD));
            let Some(found) = (next..self.rows).find(|&r| self.data[r * self.stride + w] & bit != 0) else {
                continue;
            };
            if found != next {
                for k in w..self.stride {
                    self.data.swap(found * self.stride + k, next * self.stride + k);
                }
            }
            let pivot_row: Vec<u64> = self.data[next * self.stride + w..(next + 1) * self.stride].to_vec();
            for r in 0..self.rows {
                if r != next && self.data[r * self.stride + w] & bit != 0 {
                    let dst = &mut self.data[r * self.stride + w..(r + 1) * self.stride];
                    for (d, s) in dst.iter_mut().zip(&pivot_row) {
                        *d ^= s;
                    }
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Row echelon form (below-pivot elimination only) for rank.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let (w, bit) = (c / WORD, 1u64 << (c % WORD));
            let Some(found) = (rank..m.rows).find(|&r| m.data[r * m.stride + w] & bit != 0) else {
                continue;
            };
            if found != rank {
                for k in w..m.stride {
                    m.data.swap(found * m.stride + k, rank * m.stride + k);
                }
            }
            let (head, tail) = m.data.split_at_mut((rank + 1) * m.stride);
            let pivot = &head[rank * m.stride + w..];
            for r in 0..(m.rows - rank - 1) {
                let row = &mut tail[r * m.stride..(r + 1) * m.stride];
                if row[w] & bit != 0 {
                    for (d, s) in row[w..].iter_mut().zip(pivot) {
                        *d ^= s;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<BinVector> {
        let mut m = self.clone();
        let pivots = m.rref(m.cols);
        let mut is_pivot = vec![false; m.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..m.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BinVector::zeros(m.cols);
                v.set(free, true);
                for (k, &p) in pivots.iter().enumerate() {
                    if m.get(k, free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    pub fn solve(&self, b: &BinVector) -> Result<Solution, Gf2Error> {
        check_dim(self.rows, b.len())?;
        let mut aug = BinMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in self.row_support(i) {
                aug.set(i, j, true);
            }
            if b.get(i) {
                aug.set(i, self.cols, true);
            }
        }
        let pivots = aug.rref(self.cols);
        let rank = pivots.len();
        if (rank..self.rows).any(|r| aug.get(r, self.cols)) {
            return Ok(Solution::Inconsistent);
        }
        let mut x = BinVector::zeros(self.cols);
        for (k, &p) in pivots.iter().enumerate() {
            if aug.get(k, self.cols) {
                x.set(p, true);
            }
        }
        if rank == self.cols {
            Ok(Solution::Unique(x))
        } else {
            Ok(Solution::Multiple {
                particular: x,
                free: self.cols - rank,
            })
        }
    }

    pub fn in_row_space(&self, v: &BinVector) -> Result<bool, Gf2Error> {
        check_dim(self.cols, v.len())?;
        Ok(RowSpace::new(self).contains(v))
    }
}

/// Reduced echelon basis of a row space, for repeated membership queries.
#[derive(Debug, Clone)]
pub struct RowSpace {
    basis: BinMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BinMatrix) -> Self {
        let mut basis = m.clone();
        let pivots = basis.rref(basis.cols);
        let basis = basis.row_range(0, pivots.len());
        Self { basis, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the basis; the remainder is zero iff `v` is in the span.
    pub fn reduce(&self, v: &BinVector) -> BinVector {
        let mut r = v.clone();
        for (k, &p) in self.pivots.iter().enumerate() {
            if r.get(p) {
                for (d, s) in r.words.iter_mut().zip(self.basis.row_words(k)) {
                    *d ^= s;
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &BinVector) -> bool {
        assert_eq!(v.len(), self.basis.cols(), "vector length must match row length");
        self.reduce(v).is_zero()
    }
}

/// Row and column index lists of a sparse binary matrix (Tanner graph view).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub check_vars: Vec<Vec<u32>>,
    pub var_checks: Vec<Vec<u32>>,
}

impl Adjacency {
    pub fn from_matrix(m: &BinMatrix) -> Self {
        let mut var_checks = vec![Vec::new(); m.cols()];
        let check_vars: Vec<Vec<u32>> = (0..m.rows())
            .map(|i| {
                let s: Vec<u32> = m.row_support(i).into_iter().map(|j| j as u32).collect();
                for &j in &s {
                    var_checks[j as usize].push(i as u32);
                }
                s
            })
            .collect();
        Self { check_vars, var_checks }
    }

    pub fn num_checks(&self) -> usize {
        self.check_vars.len()
    }

    pub fn num_vars(&self) -> usize {
        self.var_checks.len()
    }

    pub fn num_edges(&self) -> usize {
        self.check_vars.iter().map(Vec::len).sum()
    }

    /// Syndrome `H v` computed from the sparse view.
    pub fn syndrome(&self, v: &BinVector) -> BinVector {
        let mut s = BinVector::zeros(self.num_checks());
        for j in v.support() {
            for &c in &self.var_checks[j] {
                s.flip(c as usize);
            }
        }
        s
    }

    /// Sorted, deduplicated check neighbourhood of a variable set.
    pub fn check_neighbourhood(&self, vars: &[usize]) -> Vec<usize> {
        let mut n: Vec<usize> = vars
            .iter()
            .flat_map(|&v| self.var_checks[v].iter().map(|&c| c as usize))
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_vectors(n: usize) -> impl Iterator<Item = BinVector> {
        (0u32..(1 << n)).map(move |mask| {
            let bits: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
            BinVector::from_bits(&bits)
        })
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> BinMatrix {
        let mut s = seed | 1;
        let mut m = BinMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                if s & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Exhaustive rank oracle: log2 of the size of the row span.
    fn brute_rank(m: &BinMatrix) -> usize {
        let rows: Vec<BinVector> = (0..m.rows()).map(|i| m.row(i)).collect();
        let mut span = std::collections::HashSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut v = BinVector::zeros(m.cols());
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_assign(r);
                }
            }
            span.insert(v);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn identity_rank_and_kernel() {
        let id = BinMatrix::identity(70);
        assert_eq!(id.rank(), 70);
        assert!(id.nullspace().is_empty());
        let b = BinVector::from_support(70, &[1, 5, 69]);
        assert_eq!(id.solve(&b).unwrap(), Solution::Unique(b.clone()));
    }

    #[test]
    fn small_kernel() {
        let m = BinMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let ker = m.nullspace();
        assert_eq!(ker, vec![BinVector::from_bits(&[1, 1, 1])]);
        let brute: Vec<BinVector> = all_vectors(3)
            .filter(|v| !v.is_zero() && m.mul_vec(v).unwrap().is_zero())
            .collect();
        assert_eq!(brute, ker);
    }

    #[test]
    fn solve_cases() {
        let zero = BinMatrix::zeros(3, 4);
        assert!(matches!(
            zero.solve(&BinVector::zeros(3)).unwrap(),
            Solution::Multiple { free: 4, .. }
        ));
        let m = BinMatrix::from_dense(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.solve(&BinVector::from_bits(&[1, 0])).unwrap(), Solution::Inconsistent);
        assert!(m.solve(&BinVector::zeros(3)).is_err());
    }

    #[test]
    fn row_space_membership() {
        let m = random_matrix(5, 9, 42);
        assert!(m.in_row_space(&m.row(3)).unwrap());
        assert!(m.in_row_space(&BinVector::zeros(9)).unwrap());
        assert!(m.in_row_space(&BinVector::zeros(4)).is_err());
    }

    #[test]
    fn perm_blocks() {
        let id = AffinePerm::identity(4);
        let m = BinMatrix::from_perm_blocks(&[vec![Block::Perm(id)]], 4).unwrap();
        assert_eq!(m, BinMatrix::identity(4));

        let f = AffinePerm::new(3, 1, 8).unwrap();
        let g = AffinePerm::new(5, 6, 8).unwrap();
        let m = BinMatrix::from_perm_blocks(&[vec![Block::Perm(f), Block::Transposed(g)]], 8).unwrap();
        assert_eq!((m.rows(), m.cols()), (8, 16));
        assert!(m.row_weights().iter().all(|&w| w == 2));
        assert!(m.col_weights().iter().all(|&w| w == 1));
        // transposed block equals the transpose of the plain block
        let plain = BinMatrix::from_perm(&g);
        assert_eq!(m.block(0, 8, 8, 8), plain.transpose());

        let bad = BinMatrix::from_perm_blocks(&[vec![Block::Perm(f)], vec![]], 8);
        assert_eq!(bad, Err(Gf2Error::RaggedGrid));
        let bad = BinMatrix::from_perm_blocks(&[vec![Block::Perm(AffinePerm::identity(5))]], 8);
        assert!(matches!(bad, Err(Gf2Error::Affine(_))));
    }

    #[test]
    fn mul_identity_and_dims() {
        let m = random_matrix(7, 10, 3);
        assert_eq!(m.mul(&BinMatrix::identity(10)).unwrap(), m);
        assert!(m.mul(&BinMatrix::identity(7)).is_err());
        assert!(m.mul_vec(&BinVector::zeros(7)).is_err());
    }

    #[test]
    fn adjacency_matches_matrix() {
        let m = random_matrix(6, 11, 9);
        let adj = Adjacency::from_matrix(&m);
        let v = BinVector::from_support(11, &[0, 4, 10]);
        assert_eq!(adj.syndrome(&v), m.mul_vec(&v).unwrap());
        assert_eq!(adj.num_edges(), m.weight());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn agrees_with_exhaustive_oracles(rows in 1usize..=8, cols in 1usize..=10, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            let rank = m.rank();
            prop_assert_eq!(rank, brute_rank(&m));
            prop_assert_eq!(rank, m.transpose().rank());
            let ker = m.nullspace();
            prop_assert_eq!(rank + ker.len(), cols);
            for v in &ker {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
            let kernel_size = all_vectors(cols).filter(|v| m.mul_vec(v).unwrap().is_zero()).count();
            prop_assert_eq!(kernel_size, 1usize << ker.len());

            let t = m.transpose();
            for b in all_vectors(rows) {
                let brute: Vec<BinVector> = all_vectors(cols).filter(|x| m.mul_vec(x).unwrap() == b).collect();
                match m.solve(&b).unwrap() {
                    Solution::Unique(x) => {
                        prop_assert_eq!(brute.len(), 1);
                        prop_assert_eq!(&brute[0], &x);
                    }
                    Solution::Multiple { particular, free } => {
                        prop_assert!(brute.len() >= 2);
                        prop_assert_eq!(brute.len(), 1usize << free);
                        prop_assert_eq!(m.mul_vec(&particular).unwrap(), b.clone());
                    }
                    Solution::Inconsistent => prop_assert!(brute.is_empty()),
                }
                // row-space membership of the transposed problem
                let in_span = all_vectors(cols).any(|x| m.mul_vec(&x).unwrap() == b);
                prop_assert_eq!(t.in_row_space(&b).unwrap(), in_span);
                prop_assert_eq!(RowSpace::new(&t).contains(&b), in_span);
            }
        }
    }
}
