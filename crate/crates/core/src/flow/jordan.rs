//! Diagonal rescaling of a real Jordan block so that its symmetric part is
//! bounded below by the real part minus a chosen margin.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

fn block_is<T: Real>(m: &Matrix<T>, r0: usize, c0: usize, s: usize, want_identity: bool) -> bool {
    (0..s).all(|i| {
        (0..s).all(|j| {
            let target = if want_identity && i == j { T::one() } else { T::zero() };
            m[(r0 + i, c0 + j)] == target
        })
    })
}

/// Returns `(Λ, P)` with `P = Λ·block·Λ⁻¹`, `Λ = diag(c^{-level})`.
///
/// Accepted inputs are real Jordan matrices made of 1×1 diagonal entries
/// `r` or 2×2 rotation blocks `[[r, ξ], [−ξ, r]]`, with identity or zero
/// blocks directly above the diagonal and zeros everywhere else. A zero
/// super-diagonal block starts a new chain.
pub fn jordan_rescale<T: Real>(block: &Matrix<T>, c: T) -> Result<(Vec<T>, Matrix<T>)> {
    if !block.is_square() || block.rows() == 0 {
        return Err(Error::NotJordan("block must be square and nonempty".into()));
    }
    if !(c > T::zero()) {
        return Err(Error::InvalidInput("margin c must be positive".into()));
    }
    let n = block.rows();
    let s = if (0..n - 1).any(|i| block[(i + 1, i)] != T::zero()) { 2 } else { 1 };
    if n % s != 0 {
        return Err(Error::NotJordan("odd size with 2x2 rotation blocks".into()));
    }
    let r = block[(0, 0)];
    let xi = if s == 2 { block[(0, 1)] } else { T::zero() };
    let k = n / s;
    let mut level = vec![0i32; k];
    for bi in 0..k {
        for bj in 0..k {
            let (r0, c0) = (bi * s, bj * s);
            let ok = if bi == bj {
                if s == 1 {
                    block[(r0, c0)] == r
                } else {
                    block[(r0, c0)] == r
                        && block[(r0 + 1, c0 + 1)] == r
                        && block[(r0, c0 + 1)] == xi
                        && block[(r0 + 1, c0)] == -xi
                }
            } else if bj == bi + 1 {
                if block_is(block, r0, c0, s, true) {
                    level[bj] = level[bi] + 1;
                    true
                } else {
                    block_is(block, r0, c0, s, false)
                }
            } else {
                block_is(block, r0, c0, s, false)
            };
            if !ok {
                return Err(Error::NotJordan(format!("unexpected entries in block ({bi}, {bj})")));
            }
        }
    }
    let lambda: Vec<T> = (0..n).map(|i| c.powi(-level[i / s])).collect();
    let p = Matrix::from_fn(n, n, |i, j| lambda[i] * block[(i, j)] / lambda[j]);
    Ok((lambda, p))
}
