//! Block-sparse storage, preconditioners and the stationary linear smoother.

pub mod dense;
mod ilu;
mod jacobi;
mod matrix;
mod partition;
mod pattern;
mod richardson;
mod scalar;
mod workspace;

pub use ilu::Ilu0;
pub use jacobi::BlockJacobi;
pub use matrix::{
    embed_vector, real_embedding, shift_diagonal, shift_diagonal_into, unembed_vector, BlockSparseMatrix,
    ComplexMatrix, CoordinateValue, RealMatrix,
};
pub use partition::PartitionMap;
pub use pattern::BlockSparsityPattern;
pub use richardson::{smoothed_solve, smoothed_solve_observed, LinearSolveReport};
pub use scalar::{norm2, Scalar};
pub use workspace::{AllocationCounter, Factor, FactorKind, LhsSlot, LhsStore};

/// Approximate inverse applied once per smoother sweep.
pub trait Preconditioner<T> {
    fn apply(&self, rhs: &[T], out: &mut [T]);
}
