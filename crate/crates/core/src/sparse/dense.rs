//! Small dense kernels on row-major `b x b` blocks.

use super::scalar::Scalar;

/// Pivot blocks whose 1-norm condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// `y += a * x`
#[inline]
pub fn gemv_add<T: Scalar>(b: usize, a: &[T], x: &[T], y: &mut [T]) {
    for r in 0..b {
        let row = &a[r * b..(r + 1) * b];
        let mut acc = T::zero();
        for c in 0..b {
            acc += row[c] * x[c];
        }
        y[r] += acc;
    }
}

/// `y -= a * x`
#[inline]
pub fn gemv_sub<T: Scalar>(b: usize, a: &[T], x: &[T], y: &mut [T]) {
    for r in 0..b {
        let row = &a[r * b..(r + 1) * b];
        let mut acc = T::zero();
        for c in 0..b {
            acc += row[c] * x[c];
        }
        y[r] -= acc;
    }
}

/// `y = a * x`
#[inline]
pub fn gemv<T: Scalar>(b: usize, a: &[T], x: &[T], y: &mut [T]) {
    for r in 0..b {
        let row = &a[r * b..(r + 1) * b];
        let mut acc = T::zero();
        for c in 0..b {
            acc += row[c] * x[c];
        }
        y[r] = acc;
    }
}

/// `c = a * b`
pub fn gemm<T: Scalar>(n: usize, a: &[T], b: &[T], c: &mut [T]) {
    for r in 0..n {
        for col in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc += a[r * n + k] * b[k * n + col];
            }
            c[r * n + col] = acc;
        }
    }
}

/// `c -= a * b`
pub fn gemm_sub<T: Scalar>(n: usize, a: &[T], b: &[T], c: &mut [T]) {
    for r in 0..n {
        for col in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc += a[r * n + k] * b[k * n + col];
            }
            c[r * n + col] -= acc;
        }
    }
}

fn norm1<T: Scalar>(n: usize, a: &[T]) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| a[r * n + c].modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Why a block could not be inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvertFailure {
    ZeroPivot,
    IllConditioned(f64),
}

/// Inverts a `n x n` block by Gauss-Jordan elimination with partial pivoting.
pub fn invert<T: Scalar>(n: usize, a: &[T], out: &mut [T]) -> Result<(), InvertFailure> {
    let mut m = a.to_vec();
    for (k, o) in out.iter_mut().enumerate() {
        *o = if k / n == k % n { T::one() } else { T::zero() };
    }
    let scale = norm1(n, a);
    if scale == 0.0 || !scale.is_finite() {
        return Err(InvertFailure::ZeroPivot);
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].modulus();
        for r in col + 1..n {
            let v = m[r * n + col].modulus();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= scale * f64::EPSILON * 1e-2 {
            return Err(InvertFailure::ZeroPivot);
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
                out.swap(col * n + c, piv * n + c);
            }
        }
        let inv_p = T::one() / m[col * n + col];
        for c in 0..n {
            m[col * n + c] *= inv_p;
            out[col * n + c] *= inv_p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == T::zero() {
                continue;
            }
            for c in 0..n {
                let mv = m[col * n + c];
                let ov = out[col * n + c];
                m[r * n + c] -= f * mv;
                out[r * n + c] -= f * ov;
            }
        }
    }
    let cond = scale * norm1(n, out);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(InvertFailure::IllConditioned(cond));
    }
    Ok(())
}

/// Solves the dense system `a x = rhs` (size `n`) with partial pivoting.
/// Used by tests and small oracles; not on the hot path.
pub fn solve_dense<T: Scalar>(n: usize, a: &[T], rhs: &[T]) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| {
            m[p * n + col]
                .modulus()
                .partial_cmp(&m[q * n + col].modulus())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv * n + col].modulus() == 0.0 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            x.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                let v = m[col * n + c];
                m[r * n + c] -= f * v;
            }
            let xv = x[col];
            x[r] -= f * xv;
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= m[r * n + c] * x[c];
        }
        x[r] = acc / m[r * n + r];
    }
    Some(x)
}
