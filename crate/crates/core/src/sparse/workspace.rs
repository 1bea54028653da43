//! Storage for the left-hand sides of the pseudo-time linear systems.
//!
//! One real slot holds the mean-flow operator; a fixed number of complex slots
//! (one per worker) are reused by every harmonic in turn. The byte count is
//! therefore independent of how many harmonics are solved.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use super::ilu::Ilu0;
use super::jacobi::BlockJacobi;
use super::matrix::BlockSparseMatrix;
use super::partition::PartitionMap;
use super::pattern::BlockSparsityPattern;
use super::scalar::Scalar;
use super::Preconditioner;
use crate::error::Result;

/// Tracks bytes held by LHS value buffers.
#[derive(Debug, Clone, Default)]
pub struct AllocationCounter {
    inner: Arc<CounterInner>,
}

#[derive(Debug, Default)]
struct CounterInner {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl AllocationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn allocate(&self, bytes: usize) {
        let now = self.inner.current.fetch_add(bytes, Ordering::SeqCst) + bytes;
        self.inner.peak.fetch_max(now, Ordering::SeqCst);
    }

    pub fn release(&self, bytes: usize) {
        self.inner.current.fetch_sub(bytes, Ordering::SeqCst);
    }

    pub fn current(&self) -> usize {
        self.inner.current.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.inner.peak.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    BlockJacobi,
    Ilu0,
}

#[derive(Debug, Clone)]
pub enum Factor<T> {
    BlockJacobi(BlockJacobi<T>),
    Ilu0(Ilu0<T>),
}

impl<T: Scalar> Factor<T> {
    pub fn value_bytes(&self) -> usize {
        match self {
            Factor::BlockJacobi(j) => j.value_bytes(),
            Factor::Ilu0(f) => f.value_bytes(),
        }
    }
}

impl<T: Scalar> Preconditioner<T> for Factor<T> {
    fn apply(&self, rhs: &[T], out: &mut [T]) {
        match self {
            Factor::BlockJacobi(j) => j.apply(rhs, out),
            Factor::Ilu0(f) => f.apply(rhs, out),
        }
    }
}

/// An operator buffer plus the matching factor buffer.
#[derive(Debug, Clone)]
pub struct LhsSlot<T> {
    pub matrix: BlockSparseMatrix<T>,
    pub factor: Factor<T>,
}

impl<T: Scalar> LhsSlot<T> {
    pub fn new(pattern: Arc<BlockSparsityPattern>, kind: FactorKind, partitions: Arc<PartitionMap>) -> Self {
        let factor = match kind {
            FactorKind::BlockJacobi => Factor::BlockJacobi(BlockJacobi::with_size(pattern.n_rows(), pattern.block())),
            FactorKind::Ilu0 => Factor::Ilu0(Ilu0::with_pattern(pattern.clone(), partitions)),
        };
        Self { matrix: BlockSparseMatrix::zeros(pattern), factor }
    }

    /// Refreshes the factor from the current matrix contents.
    pub fn refactor(&mut self) -> Result<()> {
        match &mut self.factor {
            Factor::BlockJacobi(j) => j.refactor(&self.matrix),
            Factor::Ilu0(f) => f.refactor(&self.matrix),
        }
    }

    pub fn value_bytes(&self) -> usize {
        self.matrix.value_bytes() + self.factor.value_bytes()
    }
}

/// LHS storage for one grid level.
#[derive(Debug)]
pub struct LhsStore {
    pub mean: LhsSlot<f64>,
    pub harmonic: Vec<LhsSlot<Complex64>>,
    counter: AllocationCounter,
    bytes: usize,
}

impl LhsStore {
    pub fn new(
        pattern: Arc<BlockSparsityPattern>,
        kind: FactorKind,
        partitions: Arc<PartitionMap>,
        harmonic_workspaces: usize,
        counter: AllocationCounter,
    ) -> Self {
        let mean = LhsSlot::new(pattern.clone(), kind, partitions.clone());
        let harmonic: Vec<_> = (0..harmonic_workspaces)
            .map(|_| LhsSlot::new(pattern.clone(), kind, partitions.clone()))
            .collect();
        let bytes = mean.value_bytes() + harmonic.iter().map(LhsSlot::value_bytes).sum::<usize>();
        counter.allocate(bytes);
        Self { mean, harmonic, counter, bytes }
    }

    pub fn pattern(&self) -> &Arc<BlockSparsityPattern> {
        self.mean.matrix.pattern()
    }

    pub fn lhs_bytes(&self) -> usize {
        self.bytes
    }

    /// Mean slot shared, harmonic slots exclusive.
    pub fn split_mut(&mut self) -> (&LhsSlot<f64>, &mut [LhsSlot<Complex64>]) {
        (&self.mean, &mut self.harmonic)
    }
}

impl Drop for LhsStore {
    fn drop(&mut self) {
        self.counter.release(self.bytes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_tracks_peak_and_release() {
        let c = AllocationCounter::new();
        let p = Arc::new(BlockSparsityPattern::from_edges(4, 3, (0..3).map(|i| (i, i + 1))).unwrap());
        let parts = Arc::new(PartitionMap::single(4));
        {
            let s = LhsStore::new(p.clone(), FactorKind::Ilu0, parts.clone(), 1, c.clone());
            assert_eq!(c.current(), s.lhs_bytes());
            assert!(Arc::ptr_eq(s.pattern(), s.harmonic[0].matrix.pattern()));
        }
        assert_eq!(c.current(), 0);
        assert!(c.peak() > 0);
    }
}
