//! Graph of a one-dimensional expanding direction by exit-side bisection.

use rayon::prelude::*;

use super::boundary::classify_boundary;
use super::graph::{GraphManifold, ZGrid};
use crate::error::{Error, Result};
use crate::flow::{integrate_with, FlowOptions};
use crate::scalar::{lit, to_f64, Real};
use crate::types::{BoxDomain, Face, Point, Side, SplitField};

#[derive(Clone, Copy, Debug)]
pub struct ShootOptions<T> {
    /// A trajectory that survives this long counts as lying on the graph.
    pub t_horizon: T,
    /// Bracket width at which bisection stops.
    pub tol: T,
    pub ode_tol: T,
    /// Samples per face for the exit-face precondition.
    pub face_samples: usize,
}

impl<T: Real> ShootOptions<T> {
    /// Horizon `20/m` for a Hyp2 margin `m`.
    pub fn from_margin(margin: T) -> Result<Self> {
        if !(margin > T::zero()) {
            return Err(Error::InvalidInput("margin must be positive".into()));
        }
        Ok(Self { t_horizon: lit::<T>(20.0) / margin, tol: lit(1e-10), ode_tol: lit(1e-10), face_samples: 16 })
    }
}

enum Fate {
    Lower,
    Upper,
    Survived,
}

fn fate<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    a: T,
    z: &[T],
    opts: &ShootOptions<T>,
) -> Result<Fate> {
    let mut fo = FlowOptions::new(opts.ode_tol).in_domain(domain);
    fo.a_faces_only = true;
    fo.record_path = false;
    let x0 = Point { a: vec![a], z: z.to_vec() };
    let tr = integrate_with(field, &x0, opts.t_horizon, &fo)?;
    Ok(match tr.exit_event.map(|e| e.face) {
        None => Fate::Survived,
        Some(Face::A { side: Side::Lower, .. }) => Fate::Lower,
        Some(_) => Fate::Upper,
    })
}

/// Bisects each z-node for the unique `a` whose forward orbit never leaves.
///
/// Only `n = 1` is supported. Nodes where the integrator fails are listed in
/// `unresolved` and carry the bracket midpoint.
pub fn compute_graph_shoot<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    grid: &ZGrid<T>,
    opts: &ShootOptions<T>,
) -> Result<GraphManifold<T>> {
    if domain.n() != 1 || field.n() != 1 {
        return Err(Error::Unsupported("shooting needs a one-dimensional a".into()));
    }
    if field.m() != domain.m() || grid.m() != domain.m() {
        return Err(Error::Shape("grid, domain and field disagree on m".into()));
    }
    let (lo, hi) = domain.a_bounds[0];
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::UnboundedA(0));
    }
    let faces = classify_boundary(field, domain, opts.face_samples)?;
    if !faces.all_exit() {
        return Err(Error::Precondition("both a-faces must be exit faces".into()));
    }
    let results: Vec<(usize, Result<(T, T)>)> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| (idx, shoot_node(field, domain, &grid.node(idx), lo, hi, opts, idx)))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut residual = Vec::with_capacity(results.len());
    let mut unresolved = Vec::new();
    for (idx, r) in results {
        match r {
            Ok((a, w)) => {
                values.push(vec![a]);
                residual.push(w);
            }
            Err(e @ Error::NonMonotone { .. }) => return Err(e),
            Err(_) => {
                values.push(vec![lit::<T>(0.5) * (lo + hi)]);
                residual.push(T::nan());
                unresolved.push(idx);
            }
        }
    }
    let mut g = GraphManifold::new(grid.clone(), domain.clone(), values, residual)?;
    g.unresolved = unresolved;
    Ok(g)
}

fn shoot_node<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    z: &[T],
    lo: T,
    hi: T,
    opts: &ShootOptions<T>,
    node: usize,
) -> Result<(T, T)> {
    let non_monotone = |detail: String| Error::NonMonotone { node, detail };
    if !matches!(fate(field, domain, lo, z, opts)?, Fate::Lower) {
        return Err(non_monotone("orbit from the lower face does not exit there".into()));
    }
    if !matches!(fate(field, domain, hi, z, opts)?, Fate::Upper) {
        return Err(non_monotone("orbit from the upper face does not exit there".into()));
    }
    let (mut l, mut h) = (lo, hi);
    let half = lit::<T>(0.5);
    while h - l > opts.tol {
        let mid = half * (l + h);
        if mid <= l || mid >= h {
            break;
        }
        match fate(field, domain, mid, z, opts)? {
            Fate::Lower => l = mid,
            Fate::Upper => h = mid,
            Fate::Survived => {
                // a survivor is close to the graph; pin it down with two neighbours
                let exits_low = matches!(fate(field, domain, mid - opts.tol, z, opts)?, Fate::Lower);
                let exits_high = matches!(fate(field, domain, mid + opts.tol, z, opts)?, Fate::Upper);
                let width = if exits_low && exits_high { opts.tol + opts.tol } else { h - l };
                return Ok((mid, width));
            }
        }
    }
    if !(h - l).is_finite() {
        return Err(non_monotone(format!("bracket [{}, {}] degenerated", to_f64(l), to_f64(h))));
    }
    Ok((half * (l + h), h - l))
}
