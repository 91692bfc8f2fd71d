//! Column-stacking vectorisation and the Kronecker product.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Stacks the columns of `m` into one vector.
pub fn vec<T: Real>(m: &Matrix<T>) -> Vec<T> {
    let (p, q) = m.shape();
    let mut out = Vec::with_capacity(p * q);
    for j in 0..q {
        for i in 0..p {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec`] for a `p×q` matrix.
pub fn unvec<T: Real>(v: &[T], p: usize, q: usize) -> Result<Matrix<T>> {
    if v.len() != p * q {
        return Err(Error::DimensionMismatch { expected: p * q, got: v.len() });
    }
    Ok(Matrix::from_fn(p, q, |i, j| v[j * p + i]))
}

pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Matrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
