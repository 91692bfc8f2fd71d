//! Graph transform: iterate `h ↦ h_new` where `Φ_τ(h_new(z), z)` lands on `h`.

use rayon::prelude::*;

use super::boundary::classify_boundary;
use super::graph::{GraphManifold, ZGrid};
use crate::error::{Error, Result};
use crate::flow::variational_final;
use crate::hypotheses::check_hyp2;
use crate::scalar::{lit, to_f64, Real};
use crate::types::{BoxDomain, Point, SplitField};

#[derive(Clone, Debug)]
pub struct TransformOptions<T> {
    /// Flow time per sweep.
    pub tau: T,
    pub max_iter: usize,
    /// Sup-norm change at which the iteration stops.
    pub tol: T,
    pub ode_tol: T,
    pub newton_iter: usize,
    /// Starting graph; the middle of the a-box when absent.
    pub initial: Option<GraphManifold<T>>,
    /// Sample density of the Hyp2 precondition.
    pub check_density: usize,
}

impl<T: Real> TransformOptions<T> {
    /// `τ = 0.5/m` for a Hyp2 margin `m`.
    pub fn from_margin(margin: T) -> Result<Self> {
        if !(margin > T::zero()) {
            return Err(Error::InvalidInput("margin must be positive".into()));
        }
        Ok(Self {
            tau: lit::<T>(0.5) / margin,
            max_iter: 200,
            tol: lit(1e-9),
            ode_tol: lit(1e-11),
            newton_iter: 12,
            initial: None,
            check_density: 9,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TransformOutcome<T> {
    pub graph: GraphManifold<T>,
    pub iterations: usize,
    /// Ratio of the last two sweep changes.
    pub contraction: Option<T>,
    pub changes: Vec<T>,
}

/// Fixed point of the graph transform on `grid`.
pub fn compute_graph_transform<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    grid: &ZGrid<T>,
    opts: &TransformOptions<T>,
) -> Result<TransformOutcome<T>> {
    if field.n() != domain.n() || field.m() != domain.m() || grid.m() != domain.m() {
        return Err(Error::Shape("grid, domain and field disagree".into()));
    }
    if !(opts.tau > T::zero()) {
        return Err(Error::InvalidInput("tau must be positive".into()));
    }
    let h2 = check_hyp2(field, domain, opts.check_density, lit(1e-12))?;
    if !h2.passed {
        return Err(Error::Precondition(format!("Hyp2 fails with margin {}", to_f64(h2.margin))));
    }
    if !classify_boundary(field, domain, opts.check_density)?.all_exit() {
        return Err(Error::Precondition("every a-face must be an exit face".into()));
    }
    let mut current = match &opts.initial {
        Some(g) => {
            if g.grid != *grid {
                return Err(Error::InvalidInput("initial graph lives on a different grid".into()));
            }
            g.clone()
        }
        None => {
            let mid: Vec<T> = domain
                .a_bounds
                .iter()
                .map(|&(lo, hi)| if lo.is_finite() && hi.is_finite() { lit::<T>(0.5) * (lo + hi) } else { T::zero() })
                .collect();
            GraphManifold::from_fn(grid.clone(), domain.clone(), |_| mid.clone())?
        }
    };
    let mut changes = Vec::new();
    for _ in 0..opts.max_iter {
        let updates: Vec<Vec<T>> = (0..grid.node_count())
            .into_par_iter()
            .map(|idx| solve_node(field, &current, &grid.node(idx), &current.h_values[idx], opts))
            .collect::<Result<_>>()?;
        let mut change = T::zero();
        let mut per_node = Vec::with_capacity(updates.len());
        for (new, old) in updates.iter().zip(&current.h_values) {
            let d = new.iter().zip(old).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
            per_node.push(d);
            change = change.max(d);
        }
        if !change.is_finite() {
            return Err(Error::Divergence("graph transform produced non-finite values".into()));
        }
        current = GraphManifold::new(grid.clone(), domain.clone(), updates, per_node)?;
        changes.push(change);
        if change < opts.tol {
            break;
        }
    }
    let last = *changes.last().unwrap_or(&T::zero());
    if !(last < opts.tol) {
        return Err(Error::Divergence(format!(
            "graph transform did not settle in {} sweeps (last change {})",
            opts.max_iter,
            to_f64(last)
        )));
    }
    let contraction = (changes.len() >= 2).then(|| {
        let k = changes.len();
        if changes[k - 2] > T::zero() {
            changes[k - 1] / changes[k - 2]
        } else {
            T::zero()
        }
    });
    Ok(TransformOutcome { graph: current, iterations: changes.len(), contraction, changes })
}

/// Newton on `a ↦ a(τ) − h(z(τ))` with Jacobian `Q_aa − Dh Q_za`.
fn solve_node<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    graph: &GraphManifold<T>,
    z: &[T],
    start: &[T],
    opts: &TransformOptions<T>,
) -> Result<Vec<T>> {
    let n = graph.n();
    let m = graph.m();
    let mut a = start.to_vec();
    let step_tol = opts.tol * lit(0.01);
    for _ in 0..opts.newton_iter {
        let (x, q) = variational_final(field, &Point { a: a.clone(), z: z.to_vec() }, opts.tau, opts.ode_tol)?;
        let target = graph.eval(&x.z)?;
        let resid: Vec<T> = x.a.iter().zip(&target).map(|(p, t)| *p - *t).collect();
        let dh = graph.eval_jacobian_fd(&x.z)?;
        let qaa = q.block(0, 0, n, n);
        let qza = q.block(n, 0, m, n);
        let jac = &qaa - &dh.matmul(&qza)?;
        let delta = jac.solve(&resid)?;
        let mut size = T::zero();
        for (ai, d) in a.iter_mut().zip(&delta) {
            *ai = *ai - *d;
            size = size.max(d.abs());
        }
        if size < step_tol {
            break;
        }
    }
    Ok(a)
}
