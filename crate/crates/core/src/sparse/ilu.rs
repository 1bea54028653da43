//! Zero-fill block incomplete LU factorization with partition dropping.
//!
//! Factors live on the operator's own pattern: strictly-lower blocks hold `L`
//! (unit block diagonal implied), diagonal and upper blocks hold `U`. Entries
//! coupling nodes assigned to different partitions are zero in both factors, so
//! each partition's sub-system is factorized and applied independently.
//! Node order is the natural one.

use std::sync::Arc;

use super::dense::{self, InvertFailure};
use super::matrix::BlockSparseMatrix;
use super::partition::PartitionMap;
use super::pattern::BlockSparsityPattern;
use super::scalar::Scalar;
use super::Preconditioner;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Ilu0<T> {
    pattern: Arc<BlockSparsityPattern>,
    partitions: Arc<PartitionMap>,
    factors: Vec<T>,
    diag_inv: Vec<T>,
}

fn pivot_error(node: usize, e: InvertFailure) -> Error {
    let reason = match e {
        InvertFailure::ZeroPivot => "zero pivot block".to_string(),
        InvertFailure::IllConditioned(c) => format!("pivot block condition estimate {c:.3e}"),
    };
    Error::Factorization { node, reason }
}

impl<T: Scalar> Ilu0<T> {
    /// Allocates factor storage without computing anything.
    pub fn with_pattern(pattern: Arc<BlockSparsityPattern>, partitions: Arc<PartitionMap>) -> Self {
        let bl = pattern.block_len();
        Self {
            factors: vec![T::zero(); pattern.nnz() * bl],
            diag_inv: vec![T::zero(); pattern.n_rows() * bl],
            pattern,
            partitions,
        }
    }

    pub fn factorize(a: &BlockSparseMatrix<T>, partitions: Arc<PartitionMap>) -> Result<Self> {
        let mut f = Self::with_pattern(a.pattern().clone(), partitions);
        f.refactor(a)?;
        Ok(f)
    }

    /// Recomputes the factors of `a` in the existing buffers.
    pub fn refactor(&mut self, a: &BlockSparseMatrix<T>) -> Result<()> {
        if !Arc::ptr_eq(a.pattern(), &self.pattern) && **a.pattern() != *self.pattern {
            return Err(Error::Shape("matrix pattern differs from factor pattern".into()));
        }
        if self.partitions.len() != self.pattern.n_rows() {
            return Err(Error::Shape(format!(
                "partition map covers {} nodes, pattern has {}",
                self.partitions.len(),
                self.pattern.n_rows()
            )));
        }
        let p = &*self.pattern;
        let b = p.block();
        let bl = p.block_len();
        let parts = &*self.partitions;
        self.factors.copy_from_slice(a.values());
        for i in 0..p.n_rows() {
            for pos in p.row(i) {
                if !parts.same(i, p.col(pos)) {
                    self.factors[pos * bl..(pos + 1) * bl].iter_mut().for_each(|v| *v = T::zero());
                }
            }
        }

        let mut lik = vec![T::zero(); bl];
        for i in 0..p.n_rows() {
            let row = p.row(i);
            for kpos in row.clone() {
                let k = p.col(kpos);
                if k >= i {
                    break;
                }
                if !parts.same(i, k) {
                    continue;
                }
                // L_ik = A_ik U_kk^-1
                dense::gemm(b, &self.factors[kpos * bl..(kpos + 1) * bl], &self.diag_inv[k * bl..(k + 1) * bl], &mut lik);
                self.factors[kpos * bl..(kpos + 1) * bl].copy_from_slice(&lik);
                for jpos in kpos + 1..row.end {
                    let j = p.col(jpos);
                    if !parts.same(i, j) {
                        continue;
                    }
                    if let Some(kj) = p.find(k, j) {
                        // kj lies in row k < i, so it precedes jpos in storage
                        let (head, tail) = self.factors.split_at_mut(jpos * bl);
                        dense::gemm_sub(b, &lik, &head[kj * bl..(kj + 1) * bl], &mut tail[..bl]);
                    }
                }
            }
            let dpos = p.diag_pos(i);
            let (src, dst) = (&self.factors[dpos * bl..(dpos + 1) * bl], &mut self.diag_inv[i * bl..(i + 1) * bl]);
            dense::invert(b, src, dst).map_err(|e| pivot_error(i, e))?;
        }
        Ok(())
    }

    pub fn pattern(&self) -> &Arc<BlockSparsityPattern> {
        &self.pattern
    }

    pub fn partitions(&self) -> &Arc<PartitionMap> {
        &self.partitions
    }

    pub fn set_partitions(&mut self, partitions: Arc<PartitionMap>) {
        self.partitions = partitions;
    }

    pub fn factor_values(&self) -> &[T] {
        &self.factors
    }

    pub fn value_bytes(&self) -> usize {
        (self.factors.capacity() + self.diag_inv.capacity()) * std::mem::size_of::<T>()
    }

    /// Dense unit-lower factor, for oracle checks.
    pub fn lower_dense(&self) -> Vec<T> {
        self.dense_part(|i, j| j < i, true)
    }

    /// Dense upper factor including the diagonal blocks.
    pub fn upper_dense(&self) -> Vec<T> {
        self.dense_part(|i, j| j >= i, false)
    }

    fn dense_part(&self, keep: impl Fn(usize, usize) -> bool, unit_diag: bool) -> Vec<T> {
        let p = &*self.pattern;
        let b = p.block();
        let bl = p.block_len();
        let n = p.n_rows() * b;
        let mut d = vec![T::zero(); n * n];
        for i in 0..p.n_rows() {
            for pos in p.row(i) {
                let j = p.col(pos);
                if !keep(i, j) {
                    continue;
                }
                let blk = &self.factors[pos * bl..(pos + 1) * bl];
                for r in 0..b {
                    for c in 0..b {
                        d[(i * b + r) * n + j * b + c] = blk[r * b + c];
                    }
                }
            }
            if unit_diag {
                for r in 0..b {
                    d[(i * b + r) * n + i * b + r] = T::one();
                }
            }
        }
        d
    }
}

impl<T: Scalar> Preconditioner<T> for Ilu0<T> {
    fn apply(&self, rhs: &[T], out: &mut [T]) {
        let p = &*self.pattern;
        let b = p.block();
        let bl = p.block_len();
        let parts = &*self.partitions;
        let n = p.n_rows();
        // forward: L y = r
        out.copy_from_slice(rhs);
        for i in 0..n {
            let (done, rest) = out.split_at_mut(i * b);
            let yi = &mut rest[..b];
            for pos in p.row(i) {
                let k = p.col(pos);
                if k >= i {
                    break;
                }
                if parts.same(i, k) {
                    dense::gemv_sub(b, &self.factors[pos * bl..(pos + 1) * bl], &done[k * b..(k + 1) * b], yi);
                }
            }
        }
        // backward: U x = y
        let mut tmp = vec![T::zero(); b];
        for i in (0..n).rev() {
            tmp.copy_from_slice(&out[i * b..(i + 1) * b]);
            for pos in p.row(i).rev() {
                let j = p.col(pos);
                if j <= i {
                    break;
                }
                if parts.same(i, j) {
                    dense::gemv_sub(b, &self.factors[pos * bl..(pos + 1) * bl], &out[j * b..(j + 1) * b], &mut tmp);
                }
            }
            dense::gemv(b, &self.diag_inv[i * bl..(i + 1) * bl], &tmp, &mut out[i * b..(i + 1) * b]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::matrix::RealMatrix;

    fn random_tridiag(n: usize, b: usize, seed: u64) -> RealMatrix {
        let p = Arc::new(BlockSparsityPattern::from_edges(n, b, (0..n - 1).map(|i| (i, i + 1))).unwrap());
        let mut a = RealMatrix::zeros(p.clone());
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for v in a.values_mut() {
            *v = next();
        }
        for i in 0..n {
            let d = a.block_mut(i, i).unwrap();
            for r in 0..b {
                d[r * b + r] += 4.0;
            }
        }
        a
    }

    #[test]
    fn block_diagonal_matrix_factors_trivially() {
        let p = Arc::new(BlockSparsityPattern::from_edges(3, 2, []).unwrap());
        let a = RealMatrix::from_values(p, (0..12).map(|k| [3.0, 1.0, -1.0, 2.0][k % 4] + k as f64 * 0.1).collect()).unwrap();
        let f = Ilu0::factorize(&a, Arc::new(PartitionMap::single(3))).unwrap();
        assert_eq!(f.upper_dense(), a.to_dense());
        let l = f.lower_dense();
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(l[r * 6 + c], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn identity_preconditioner_returns_rhs() {
        let p = Arc::new(BlockSparsityPattern::from_edges(4, 1, (0..3).map(|i| (i, i + 1))).unwrap());
        let mut a = RealMatrix::zeros(p);
        for i in 0..4 {
            a.block_mut(i, i).unwrap()[0] = 1.0;
        }
        let f = Ilu0::factorize(&a, Arc::new(PartitionMap::single(4))).unwrap();
        let r = [1.0, -2.0, 3.5, 0.25];
        let mut out = [0.0; 4];
        f.apply(&r, &mut out);
        assert_eq!(out, r);
    }

    #[test]
    fn cross_partition_factor_entries_are_zero() {
        let a = random_tridiag(8, 2, 7);
        let parts = Arc::new(PartitionMap::contiguous(8, 2).unwrap());
        let f = Ilu0::factorize(&a, parts.clone()).unwrap();
        let p = a.pattern();
        for i in 0..8 {
            for pos in p.row(i) {
                if !parts.same(i, p.col(pos)) {
                    assert!(f.factor_values()[pos * 4..pos * 4 + 4].iter().all(|v| *v == 0.0));
                }
            }
        }
    }

    #[test]
    fn singular_pivot_reports_node() {
        let p = Arc::new(BlockSparsityPattern::from_edges(3, 1, [(0, 1), (1, 2)]).unwrap());
        // row 1 pivot becomes 1 - 1*1 = 0 after elimination
        let a = RealMatrix::from_values(p, vec![1.0, 1.0, 1.0, 1.0, 0.0, 2.0, 1.0]).unwrap();
        match Ilu0::factorize(&a, Arc::new(PartitionMap::single(3))) {
            Err(Error::Factorization { node, .. }) => assert_eq!(node, 1),
            other => panic!("expected factorization error, got {other:?}"),
        }
    }

    #[test]
    fn refactor_reuses_buffers() {
        let a = random_tridiag(6, 3, 1);
        let b = random_tridiag(6, 3, 2);
        let parts = Arc::new(PartitionMap::single(6));
        let mut f = Ilu0::factorize(&a, parts.clone()).unwrap();
        let bytes = f.value_bytes();
        f.refactor(&b).unwrap();
        assert_eq!(f.value_bytes(), bytes);
        let fresh = Ilu0::factorize(&b, parts).unwrap();
        assert_eq!(f.factor_values(), fresh.factor_values());
    }
}
