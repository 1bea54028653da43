use super::dense;
use super::matrix::BlockSparseMatrix;
use super::scalar::Scalar;
use super::Preconditioner;
use crate::error::{Error, Result};

/// Inverted diagonal blocks of an operator; applying it is the per-node
/// dense solve of the explicit scheme.
#[derive(Debug, Clone)]
pub struct BlockJacobi<T> {
    block: usize,
    diag_inv: Vec<T>,
}

impl<T: Scalar> BlockJacobi<T> {
    pub fn with_size(n: usize, block: usize) -> Self {
        Self { block, diag_inv: vec![T::zero(); n * block * block] }
    }

    pub fn from_matrix(a: &BlockSparseMatrix<T>) -> Result<Self> {
        let mut j = Self::with_size(a.n_rows(), a.block_size());
        j.refactor(a)?;
        Ok(j)
    }

    /// Builds from a flat list of diagonal blocks.
    pub fn from_blocks(blocks: &[T], block: usize) -> Result<Self> {
        let bl = block * block;
        let mut diag_inv = vec![T::zero(); blocks.len()];
        for (i, (src, dst)) in blocks.chunks(bl).zip(diag_inv.chunks_mut(bl)).enumerate() {
            dense::invert(block, src, dst).map_err(|_| Error::SingularBlock { node: i })?;
        }
        Ok(Self { block, diag_inv })
    }

    pub fn refactor(&mut self, a: &BlockSparseMatrix<T>) -> Result<()> {
        let b = self.block;
        let bl = b * b;
        if a.block_size() != b || a.n_rows() * bl != self.diag_inv.len() {
            return Err(Error::Shape("block-Jacobi size differs from operator".into()));
        }
        for i in 0..a.n_rows() {
            dense::invert(b, a.diag_block(i), &mut self.diag_inv[i * bl..(i + 1) * bl])
                .map_err(|_| Error::SingularBlock { node: i })?;
        }
        Ok(())
    }

    pub fn value_bytes(&self) -> usize {
        self.diag_inv.capacity() * std::mem::size_of::<T>()
    }
}

impl<T: Scalar> Preconditioner<T> for BlockJacobi<T> {
    fn apply(&self, rhs: &[T], out: &mut [T]) {
        let b = self.block;
        let bl = b * b;
        for (i, (r, o)) in rhs.chunks(b).zip(out.chunks_mut(b)).enumerate() {
            dense::gemv(b, &self.diag_inv[i * bl..(i + 1) * bl], r, o);
        }
    }
}
