//! Matrix Riccati flow of the graph derivative along the graph.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::manifold::GraphFn;
use crate::scalar::{lit, to_f64, Real};
use crate::types::SplitField;

use super::ode::{dopri5, Control, OdeOptions};

/// `‖V‖` beyond which the solution is treated as escaping.
pub const BLOW_UP_NORM: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiPath<T> {
    pub times: Vec<T>,
    pub z: Vec<Vec<T>>,
    pub v: Vec<Matrix<T>>,
}

impl<T: Real> RiccatiPath<T> {
    pub fn final_v(&self) -> &Matrix<T> {
        self.v.last().expect("path has a start point")
    }

    pub fn final_z(&self) -> &[T] {
        self.z.last().expect("path has a start point")
    }
}

/// Right-hand side `V̇ = D_a f V − V D_z g − V D_a g V + D_z f` at `(h(z), z)`,
/// together with `ż = g(h(z), z)`.
pub(crate) fn riccati_rhs<T: Real, F: SplitField<T> + ?Sized, G: GraphFn<T> + ?Sized>(
    field: &F,
    graph: &G,
    z: &[T],
    v: &Matrix<T>,
) -> Result<(Vec<T>, Matrix<T>)> {
    let a = graph.h(z)?;
    let j = field.jacobian(&a, z);
    let zdot = field.g(&a, z);
    let av = j.aa.matmul(v)?;
    let vd = v.matmul(&j.zz)?;
    let vgv = v.matmul(&j.za)?.matmul(v)?;
    let vdot = &(&(&av - &vd) - &vgv) + &j.az;
    Ok((zdot, vdot))
}

/// Integrates the Riccati flow from `(z0, V0)` over `[0, t_end]` (signed).
pub fn riccati_integrate<T: Real, F: SplitField<T> + ?Sized, G: GraphFn<T> + ?Sized>(
    field: &F,
    graph: &G,
    z0: &[T],
    v0: &Matrix<T>,
    t_end: T,
    tol: T,
) -> Result<RiccatiPath<T>> {
    let n = field.n();
    let m = field.m();
    if z0.len() != m || graph.m() != m || graph.n() != n {
        return Err(Error::DimensionMismatch { expected: m, got: z0.len() });
    }
    if v0.shape() != (n, m) {
        return Err(Error::Shape(format!("V must be {n}x{m}")));
    }
    let mut y0 = z0.to_vec();
    y0.extend_from_slice(v0.as_slice());
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let v = Matrix::from_row_major(n, m, y[m..].to_vec());
        let (zdot, vdot) = riccati_rhs(field, graph, &y[..m], &v)?;
        dy[..m].copy_from_slice(&zdot);
        dy[m..].copy_from_slice(vdot.as_slice());
        Ok(())
    };
    let mut path = RiccatiPath { times: vec![T::zero()], z: vec![z0.to_vec()], v: vec![v0.clone()] };
    let cap = lit::<T>(BLOW_UP_NORM);
    let res = dopri5(rhs, T::zero(), &y0, t_end, &OdeOptions::with_tol(tol), |s| {
        let v = Matrix::from_row_major(n, m, s.y1[m..].to_vec());
        let norm = v.frobenius_norm();
        if !(norm <= cap) {
            return Err(Error::RiccatiBlowUp { t: to_f64(s.t1()), norm: to_f64(norm) });
        }
        path.times.push(s.t1());
        path.z.push(s.y1[..m].to_vec());
        path.v.push(v);
        Ok(Control::Continue)
    });
    match res {
        Ok(_) => Ok(path),
        Err(Error::NonFinite { t }) | Err(Error::StepUnderflow { t, .. }) => {
            let norm = path.final_v().frobenius_norm();
            if to_f64(norm) > 1e3 {
                Err(Error::RiccatiBlowUp { t, norm: to_f64(norm) })
            } else {
                Err(Error::StepUnderflow { t, h: 0.0 })
            }
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::FnGraph;
    use crate::types::FnField;

    fn toy() -> FnField<f64> {
        FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![2.0 * a[0] - z[0].sin()], |_a: &[f64], _z: &[f64]| vec![0.0])
    }

    #[test]
    fn backward_converges_to_half_cos() {
        let g = FnGraph::new(1, 1, |z: &[f64]| vec![z[0].sin() / 2.0]);
        for &z in &[0.0, 1.0, 2.5] {
            let p = riccati_integrate(&toy(), &g, &[z], &Matrix::zeros(1, 1), -12.0, 1e-12).unwrap();
            assert!((p.final_v()[(0, 0)] - z.cos() / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_escapes() {
        let g = FnGraph::new(1, 1, |_z: &[f64]| vec![0.0]);
        let r = riccati_integrate(&toy(), &g, &[0.0], &Matrix::from_diag(&[5.0]), 20.0, 1e-9);
        assert!(matches!(r, Err(Error::RiccatiBlowUp { .. })));
    }

    #[test]
    fn zero_stays_zero() {
        let f = FnField::new(1, 1, |a: &[f64], _z: &[f64]| vec![a[0]], |_a: &[f64], z: &[f64]| vec![z[0].cos()]);
        let g = FnGraph::new(1, 1, |_z: &[f64]| vec![0.0]);
        let p = riccati_integrate(&f, &g, &[0.3], &Matrix::zeros(1, 1), -3.0, 1e-10).unwrap();
        assert!(p.v.iter().all(|v| v[(0, 0)] == 0.0));
    }
}
