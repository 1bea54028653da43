use super::matrix::BlockSparseMatrix;
use super::scalar::{norm2, Scalar};
use super::Preconditioner;
use crate::error::{Error, Result};

/// Outcome of one preconditioned Richardson solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveReport {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub converged: bool,
}

impl LinearSolveReport {
    pub fn relative_residual(&self) -> f64 {
        if self.initial_residual == 0.0 {
            0.0
        } else {
            self.final_residual / self.initial_residual
        }
    }
}

/// Stationary iteration `x <- x + M^-1 (b - A x)` from `x = 0`, stopping once
/// `||b - A x||_2 <= tol_rel ||b||_2` or after `max_iter` sweeps.
pub fn smoothed_solve<T: Scalar, P: Preconditioner<T> + ?Sized>(
    a: &BlockSparseMatrix<T>,
    rhs: &[T],
    pre: &P,
    tol_rel: f64,
    max_iter: usize,
) -> Result<(Vec<T>, LinearSolveReport)> {
    smoothed_solve_observed(a, rhs, pre, tol_rel, max_iter, |_, _| {})
}

/// As [`smoothed_solve`], calling `observe(iteration, x)` after every sweep.
pub fn smoothed_solve_observed<T: Scalar, P: Preconditioner<T> + ?Sized>(
    a: &BlockSparseMatrix<T>,
    rhs: &[T],
    pre: &P,
    tol_rel: f64,
    max_iter: usize,
    mut observe: impl FnMut(usize, &[T]),
) -> Result<(Vec<T>, LinearSolveReport)> {
    let n = rhs.len();
    let mut x = vec![T::zero(); n];
    let b_norm = norm2(rhs);
    let mut report = LinearSolveReport { iterations: 0, initial_residual: b_norm, final_residual: b_norm, converged: true };
    if b_norm == 0.0 {
        return Ok((x, report));
    }
    report.converged = false;
    let mut r = rhs.to_vec();
    let mut dx = vec![T::zero(); n];
    for it in 1..=max_iter.max(1) {
        pre.apply(&r, &mut dx);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += *d;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearDivergence { iteration: it });
        }
        a.residual(rhs, &x, &mut r);
        let rn = norm2(&r);
        report.iterations = it;
        report.final_residual = rn;
        observe(it, &x);
        if rn <= tol_rel * b_norm {
            report.converged = true;
            break;
        }
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::sparse::{BlockJacobi, BlockSparsityPattern, RealMatrix};

    fn laplace_1d(n: usize) -> RealMatrix {
        let p = Arc::new(BlockSparsityPattern::from_edges(n, 1, (0..n - 1).map(|i| (i, i + 1))).unwrap());
        let mut a = RealMatrix::zeros(p);
        for i in 0..n {
            a.block_mut(i, i).unwrap()[0] = 2.5;
            if i + 1 < n {
                a.block_mut(i, i + 1).unwrap()[0] = -1.0;
                a.block_mut(i + 1, i).unwrap()[0] = -1.0;
            }
        }
        a
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let a = laplace_1d(5);
        let j = BlockJacobi::from_matrix(&a).unwrap();
        let (x, rep) = smoothed_solve(&a, &[0.0; 5], &j, 1e-2, 10).unwrap();
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn stops_at_iteration_limit() {
        let a = laplace_1d(40);
        let j = BlockJacobi::from_matrix(&a).unwrap();
        let b = vec![1.0; 40];
        let (_, rep) = smoothed_solve(&a, &b, &j, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 10);
        assert!(!rep.converged);
        assert!(rep.final_residual < rep.initial_residual);
    }

    #[test]
    fn observer_sees_every_iterate() {
        let a = laplace_1d(10);
        let j = BlockJacobi::from_matrix(&a).unwrap();
        let mut seen = 0;
        let (_, rep) = smoothed_solve_observed(&a, &[1.0; 10], &j, 1e-3, 50, |it, _| seen = it).unwrap();
        assert_eq!(seen, rep.iterations);
        assert!(rep.converged);
    }
}
