//! `Dh` on the graph nodes from the backward Riccati flow.

use rayon::prelude::*;

use super::graph::{GraphFn, GraphManifold};
use crate::error::{Error, Result};
use crate::flow::{dopri5, riccati_integrate, Control, OdeOptions};
use crate::linalg::Matrix;
use crate::scalar::{to_f64, Real};
use crate::types::SplitField;

/// Attaches `Dh` samples to `graph`.
///
/// Each node is flowed forward along the graph for `t_back`, then the Riccati
/// equation is integrated back from `V = 0`; the contraction of the backward
/// flow makes the start value irrelevant. Fails if any `‖Dh‖ ≥ 1`.
pub fn derivative_field<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    graph: &GraphManifold<T>,
    t_back: T,
    tol: T,
) -> Result<GraphManifold<T>> {
    if !graph.residual.is_finite() || !graph.unresolved.is_empty() {
        return Err(Error::Precondition("graph has unresolved nodes".into()));
    }
    if !(t_back > T::zero()) {
        return Err(Error::InvalidInput("t_back must be positive".into()));
    }
    let (n, m) = (graph.n(), graph.m());
    let grid = &graph.grid;
    let dh: Vec<Matrix<T>> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| {
            let z0 = grid.node(idx);
            let rhs = |_t: T, z: &[T], dz: &mut [T]| {
                let a = graph.h(z)?;
                dz.copy_from_slice(&field.g(&a, z));
                Ok(())
            };
            let (_, z_far, _) = dopri5(rhs, T::zero(), &z0, t_back, &OdeOptions::with_tol(tol), |_| Ok(Control::Continue))?;
            let path = riccati_integrate(field, graph, &z_far, &Matrix::zeros(n, m), -t_back, tol)?;
            let v = path.final_v().clone();
            let norm = v.spectral_norm()?;
            if !(norm < T::one()) {
                return Err(Error::Precondition(format!("|Dh| = {} at node {idx} is not below 1", to_f64(norm))));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let mut out = graph.clone();
    out.dh_values = Some(dh);
    Ok(out)
}
