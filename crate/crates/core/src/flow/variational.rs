//! Fundamental matrix `Q(t, x)` of the linearisation along `Φ(t, x)`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::types::{Point, SplitField};

use super::ode::{dopri5, Control, OdeOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalPath<T> {
    pub times: Vec<T>,
    pub states: Vec<Point<T>>,
    pub matrices: Vec<Matrix<T>>,
}

fn augmented_rhs<'f, T: Real, F: SplitField<T> + ?Sized>(
    field: &'f F,
) -> impl FnMut(T, &[T], &mut [T]) -> Result<()> + 'f {
    let n = field.n();
    let dim = n + field.m();
    move |_t, y, dy| {
        let (x, q) = y.split_at(dim);
        let (a, z) = x.split_at(n);
        let fx = field.eval_state(x);
        dy[..dim].copy_from_slice(&fx);
        let j = field.jacobian(a, z).full();
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = T::zero();
                for k in 0..dim {
                    acc = acc + j[(r, k)] * q[k * dim + c];
                }
                dy[dim + r * dim + c] = acc;
            }
        }
        Ok(())
    }
}

fn start<T: Real, F: SplitField<T> + ?Sized>(field: &F, x0: &Point<T>) -> Result<Vec<T>> {
    if x0.n() != field.n() || x0.m() != field.m() {
        return Err(Error::DimensionMismatch { expected: field.n() + field.m(), got: x0.n() + x0.m() });
    }
    let dim = field.n() + field.m();
    let mut y = x0.to_state();
    y.extend_from_slice(Matrix::<T>::identity(dim).as_slice());
    Ok(y)
}

/// Co-integrates `x` and `Q` with `Q̇ = DF(x) Q`, `Q(0) = I`.
pub fn variational<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x0: &Point<T>,
    t_end: T,
    tol: T,
) -> Result<VariationalPath<T>> {
    let y0 = start(field, x0)?;
    let n = field.n();
    let dim = n + field.m();
    let mut path = VariationalPath {
        times: vec![T::zero()],
        states: vec![x0.clone()],
        matrices: vec![Matrix::identity(dim)],
    };
    dopri5(augmented_rhs(field), T::zero(), &y0, t_end, &OdeOptions::with_tol(tol), |s| {
        path.times.push(s.t1());
        path.states.push(Point::from_state(&s.y1[..dim], n));
        path.matrices.push(Matrix::from_row_major(dim, dim, s.y1[dim..].to_vec()));
        Ok(Control::Continue)
    })?;
    Ok(path)
}

/// End state and `Q(t_end, x0)` without storing the path.
pub fn variational_final<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x0: &Point<T>,
    t_end: T,
    tol: T,
) -> Result<(Point<T>, Matrix<T>)> {
    let y0 = start(field, x0)?;
    let n = field.n();
    let dim = n + field.m();
    let (_, y, _) =
        dopri5(augmented_rhs(field), T::zero(), &y0, t_end, &OdeOptions::with_tol(tol), |_| Ok(Control::Continue))?;
    Ok((Point::from_state(&y[..dim], n), Matrix::from_row_major(dim, dim, y[dim..].to_vec())))
}
