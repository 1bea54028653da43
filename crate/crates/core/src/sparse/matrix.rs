use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use super::dense;
use super::pattern::BlockSparsityPattern;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Block-sparse matrix over a shared pattern. Values are stored block after
/// block in pattern order, each block row-major.
#[derive(Debug, Clone)]
pub struct BlockSparseMatrix<T> {
    pattern: Arc<BlockSparsityPattern>,
    values: Vec<T>,
}

pub type RealMatrix = BlockSparseMatrix<f64>;
pub type ComplexMatrix = BlockSparseMatrix<Complex64>;

impl<T: Scalar> BlockSparseMatrix<T> {
    pub fn zeros(pattern: Arc<BlockSparsityPattern>) -> Self {
        let len = pattern.nnz() * pattern.block_len();
        Self { pattern, values: vec![T::zero(); len] }
    }

    pub fn from_values(pattern: Arc<BlockSparsityPattern>, values: Vec<T>) -> Result<Self> {
        if values.len() != pattern.nnz() * pattern.block_len() {
            return Err(Error::Shape(format!(
                "{} values for {} blocks of size {}",
                values.len(),
                pattern.nnz(),
                pattern.block()
            )));
        }
        Ok(Self { pattern, values })
    }

    pub fn pattern(&self) -> &Arc<BlockSparsityPattern> {
        &self.pattern
    }

    pub fn block_size(&self) -> usize {
        self.pattern.block()
    }

    pub fn n_rows(&self) -> usize {
        self.pattern.n_rows()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Bytes held by the value buffer.
    pub fn value_bytes(&self) -> usize {
        self.values.capacity() * std::mem::size_of::<T>()
    }

    #[inline]
    pub fn block_at(&self, pos: usize) -> &[T] {
        let bl = self.pattern.block_len();
        &self.values[pos * bl..(pos + 1) * bl]
    }

    #[inline]
    pub fn block_at_mut(&mut self, pos: usize) -> &mut [T] {
        let bl = self.pattern.block_len();
        &mut self.values[pos * bl..(pos + 1) * bl]
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[T]> {
        self.pattern.find(i, j).map(|p| self.block_at(p))
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut [T]> {
        self.pattern.find(i, j).map(move |p| self.block_at_mut(p))
    }

    pub fn diag_block(&self, i: usize) -> &[T] {
        self.block_at(self.pattern.diag_pos(i))
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v = v.scale(s));
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        let b = self.block_size();
        for i in 0..self.n_rows() {
            let yi = &mut y[i * b..(i + 1) * b];
            yi.iter_mut().for_each(|v| *v = T::zero());
            for pos in self.pattern.row(i) {
                let j = self.pattern.col(pos);
                dense::gemv_add(b, self.block_at(pos), &x[j * b..(j + 1) * b], yi);
            }
        }
    }

    /// `r = rhs - A x`
    pub fn residual(&self, rhs: &[T], x: &[T], r: &mut [T]) {
        let b = self.block_size();
        r.copy_from_slice(rhs);
        for i in 0..self.n_rows() {
            let ri = &mut r[i * b..(i + 1) * b];
            for pos in self.pattern.row(i) {
                let j = self.pattern.col(pos);
                dense::gemv_sub(b, self.block_at(pos), &x[j * b..(j + 1) * b], ri);
            }
        }
    }

    /// Dense row-major copy, for oracle comparisons on small systems.
    pub fn to_dense(&self) -> Vec<T> {
        let b = self.block_size();
        let n = self.n_rows() * b;
        let mut d = vec![T::zero(); n * n];
        for i in 0..self.n_rows() {
            for pos in self.pattern.row(i) {
                let j = self.pattern.col(pos);
                let blk = self.block_at(pos);
                for r in 0..b {
                    for c in 0..b {
                        d[(i * b + r) * n + j * b + c] = blk[r * b + c];
                    }
                }
            }
        }
        d
    }

    /// Coordinate text dump: one line per stored block entry,
    /// `row col value` (complex values as `re im`).
    pub fn dump_coordinate(&self) -> String
    where
        T: CoordinateValue,
    {
        let b = self.block_size();
        let mut out = String::new();
        let _ = writeln!(out, "% block-sparse n={} block={} nnz={}", self.n_rows(), b, self.pattern.nnz());
        for i in 0..self.n_rows() {
            for pos in self.pattern.row(i) {
                let j = self.pattern.col(pos);
                let blk = self.block_at(pos);
                for r in 0..b {
                    for c in 0..b {
                        let _ = writeln!(out, "{} {} {}", i * b + r, j * b + c, blk[r * b + c].coordinate());
                    }
                }
            }
        }
        out
    }
}

/// Formatting hook for [`BlockSparseMatrix::dump_coordinate`].
pub trait CoordinateValue {
    fn coordinate(&self) -> String;
}

impl CoordinateValue for f64 {
    fn coordinate(&self) -> String {
        format!("{self:.17e}")
    }
}

impl CoordinateValue for Complex64 {
    fn coordinate(&self) -> String {
        format!("{:.17e} {:.17e}", self.re, self.im)
    }
}

/// Adds a per-node complex scalar times identity to the diagonal blocks of a
/// real matrix, writing into an existing complex matrix over the same pattern.
/// Every value of `out` is overwritten.
pub fn shift_diagonal_into(a: &RealMatrix, shifts: &[Complex64], out: &mut ComplexMatrix) -> Result<()> {
    if !Arc::ptr_eq(a.pattern(), out.pattern()) && a.pattern() != out.pattern() {
        return Err(Error::Shape("shift target does not share the operator pattern".into()));
    }
    if shifts.len() != a.n_rows() {
        return Err(Error::Shape(format!("{} shifts for {} nodes", shifts.len(), a.n_rows())));
    }
    for (o, &v) in out.values.iter_mut().zip(&a.values) {
        *o = Complex64::new(v, 0.0);
    }
    let b = a.block_size();
    for (i, &s) in shifts.iter().enumerate() {
        let blk = out.block_at_mut(a.pattern.diag_pos(i));
        for r in 0..b {
            blk[r * b + r] += s;
        }
    }
    Ok(())
}

/// Allocating variant of [`shift_diagonal_into`].
pub fn shift_diagonal(a: &RealMatrix, shifts: &[Complex64]) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(a.pattern().clone());
    shift_diagonal_into(a, shifts, &mut out)?;
    Ok(out)
}

/// Maps each complex block `Z` to the real block `[[Re Z, -Im Z], [Im Z, Re Z]]`
/// (block size doubles). Vectors map node-wise to `[Re x_i; Im x_i]`.
pub fn real_embedding(a: &ComplexMatrix) -> RealMatrix {
    let b = a.block_size();
    let b2 = 2 * b;
    let pattern = Arc::new(a.pattern().with_block(b2));
    let mut out = RealMatrix::zeros(pattern);
    for pos in 0..a.pattern().nnz() {
        let z = a.block_at(pos);
        let e = out.block_at_mut(pos);
        for r in 0..b {
            for c in 0..b {
                let v = z[r * b + c];
                e[r * b2 + c] = v.re;
                e[r * b2 + b + c] = -v.im;
                e[(b + r) * b2 + c] = v.im;
                e[(b + r) * b2 + b + c] = v.re;
            }
        }
    }
    out
}

pub fn embed_vector(x: &[Complex64], block: usize) -> Vec<f64> {
    let mut out = vec![0.0; 2 * x.len()];
    for (i, chunk) in x.chunks(block).enumerate() {
        for (k, v) in chunk.iter().enumerate() {
            out[2 * block * i + k] = v.re;
            out[2 * block * i + block + k] = v.im;
        }
    }
    out
}

pub fn unembed_vector(x: &[f64], block: usize) -> Vec<Complex64> {
    x.chunks(2 * block)
        .flat_map(|c| (0..block).map(move |k| Complex64::new(c[k], c[block + k])))
        .collect()
}
