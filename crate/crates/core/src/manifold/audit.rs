//! Numerical audits of a computed graph and of the cone structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::graph::GraphManifold;
use crate::error::{Error, Result};
use crate::flow::{integrate, integrate_with, FlowOptions};
use crate::hypotheses::{CheckReport, Inequality};
use crate::scalar::{dist, lit, Real};
use crate::types::{cone_gauge, BoxDomain, Point, SplitField};

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport<T> {
    pub max_residual: T,
    pub worst_node: usize,
    /// Probes whose orbit left the domain before `t_probe`.
    pub flagged: usize,
    pub samples: usize,
}

/// Flows `sample_count` graph nodes for `t_probe` and measures `|a(t) − h(z(t))|`.
///
/// An orbit that leaves the graph's domain early is measured at the exit point
/// and counted in `flagged`.
pub fn invariance_residual<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    graph: &GraphManifold<T>,
    t_probe: T,
    sample_count: usize,
    tol: T,
) -> Result<InvarianceReport<T>> {
    let total = graph.grid.node_count();
    if sample_count == 0 {
        return Err(Error::InvalidInput("need at least one probe".into()));
    }
    let count = sample_count.min(total);
    let picks: Vec<usize> = (0..count).map(|k| k * total / count).collect();
    let out: Vec<(T, bool, usize)> = picks
        .par_iter()
        .map(|&idx| {
            let x0 = Point { a: graph.h_values[idx].clone(), z: graph.grid.node(idx) };
            let mut opts = FlowOptions::new(tol).in_domain(&graph.domain);
            opts.record_path = false;
            let tr = integrate_with(field, &x0, t_probe, &opts)?;
            let end = tr.final_state();
            let on = graph.eval(&end.z)?;
            Ok((dist(&end.a, &on), tr.exit_event.is_some(), idx))
        })
        .collect::<Result<_>>()?;
    let mut rep = InvarianceReport { max_residual: T::zero(), worst_node: 0, flagged: 0, samples: count };
    for (r, exited, idx) in out {
        if exited {
            rep.flagged += 1;
        }
        if r > rep.max_residual || r.is_nan() {
            rep.max_residual = r;
            rep.worst_node = idx;
        }
    }
    Ok(rep)
}

/// `1 −` the largest ratio `‖h(z) − h(z′)‖ / ‖z − z′‖` over adjacent nodes and
/// `pair_samples` random node pairs (fixed seed).
pub fn lipschitz_audit<T: Real>(graph: &GraphManifold<T>, pair_samples: usize) -> Result<CheckReport<T>> {
    let grid = &graph.grid;
    let total = grid.node_count();
    let mut pairs = Vec::new();
    for idx in 0..total {
        let multi = grid.multi_index(idx);
        for (d, ax) in grid.axes.iter().enumerate() {
            if multi[d] + 1 < ax.len() {
                let mut next = multi.clone();
                next[d] += 1;
                pairs.push((idx, grid.flat_index(&next)));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..pair_samples {
        let (i, j) = (rng.gen_range(0..total), rng.gen_range(0..total));
        if i != j {
            pairs.push((i, j));
        }
    }
    let mut worst = (T::neg_infinity(), 0);
    for &(i, j) in &pairs {
        let dz = dist(&grid.node(i), &grid.node(j));
        if dz > T::zero() {
            let ratio = dist(&graph.h_values[i], &graph.h_values[j]) / dz;
            if ratio > worst.0 || ratio.is_nan() {
                worst = (ratio, i);
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDomain("no node pairs to compare".into()));
    }
    let p = Point { a: graph.h_values[worst.1].clone(), z: grid.node(worst.1) };
    Ok(CheckReport::from_margin(Inequality::Lipschitz, T::one() - worst.0, p, pairs.len()))
}

/// Cone gauge along two orbits sampled at `steps` equal checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeTrace<T> {
    pub times: Vec<T>,
    pub gauges: Vec<T>,
    /// The gauge never dropped below `−slack`.
    pub holds: bool,
    /// Once positive, the gauge never decreased by more than `slack`.
    pub monotone: bool,
    /// An orbit left the domain before `t_end`.
    pub truncated: bool,
    pub slack: T,
}

fn march<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x1: &Point<T>,
    x2: &Point<T>,
    t_end: T,
    steps: usize,
    domain: Option<&BoxDomain<T>>,
    tol: T,
) -> Result<(Vec<T>, Vec<(Point<T>, Point<T>)>, bool)> {
    if steps == 0 {
        return Err(Error::InvalidInput("need at least one checkpoint".into()));
    }
    let dt = t_end / lit(steps as f64);
    let mut p = (x1.clone(), x2.clone());
    let mut times = vec![T::zero()];
    let mut states = vec![p.clone()];
    for k in 1..=steps {
        let t1 = integrate(field, &p.0, dt, tol, domain)?;
        let t2 = integrate(field, &p.1, dt, tol, domain)?;
        if t1.exit_event.is_some() || t2.exit_event.is_some() {
            return Ok((times, states, true));
        }
        p = (t1.final_state().clone(), t2.final_state().clone());
        times.push(dt * lit(k as f64));
        states.push(p.clone());
    }
    Ok((times, states, false))
}

pub fn cone_invariance_probe<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x1: &Point<T>,
    x2: &Point<T>,
    t_end: T,
    steps: usize,
    domain: Option<&BoxDomain<T>>,
    tol: T,
) -> Result<ConeTrace<T>> {
    let (times, states, truncated) = march(field, x1, x2, t_end, steps, domain, tol)?;
    let gauges = states.iter().map(|(p, q)| cone_gauge(p, q)).collect::<Result<Vec<T>>>()?;
    let slack = tol * lit(100.0);
    let holds = gauges[0] < T::zero() || gauges.iter().all(|&g| g >= -slack);
    let monotone = gauges.windows(2).all(|w| !(w[0] > T::zero()) || w[1] >= w[0] - slack);
    Ok(ConeTrace { times, gauges, holds, monotone, truncated, slack })
}

/// `min_t ‖ã₂ − ã₁‖ − ‖a₂ − a₁‖ e^{c₁ t}` over checkpoints after the start.
pub fn separation_probe<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x1: &Point<T>,
    x2: &Point<T>,
    t_end: T,
    c1: T,
    steps: usize,
    domain: Option<&BoxDomain<T>>,
    tol: T,
) -> Result<CheckReport<T>> {
    let (times, states, _) = march(field, x1, x2, t_end, steps, domain, tol)?;
    if times.len() < 2 {
        return Err(Error::EmptyDomain("orbits left the domain before the first checkpoint".into()));
    }
    let d0 = dist(&x1.a, &x2.a);
    let mut worst = (T::infinity(), 1);
    for k in 1..times.len() {
        let (p, q) = &states[k];
        let m = dist(&p.a, &q.a) - d0 * (c1 * times[k]).exp();
        if m < worst.0 {
            worst = (m, k);
        }
    }
    Ok(CheckReport::from_margin(Inequality::Separation, worst.0, states[worst.1].0.clone(), times.len() - 1))
}

/// `tol −` the largest difference between nodes one period apart.
///
/// `periods[i]` must be `None` or an integer multiple of the spacing of axis `i`.
pub fn periodicity_audit<T: Real>(graph: &GraphManifold<T>, periods: &[Option<T>], tol: T) -> Result<CheckReport<T>> {
    let grid = &graph.grid;
    if periods.len() != grid.m() {
        return Err(Error::DimensionMismatch { expected: grid.m(), got: periods.len() });
    }
    let mut worst = (T::zero(), 0usize);
    let mut samples = 0;
    for (d, p) in periods.iter().enumerate() {
        let Some(p) = *p else { continue };
        let ax = &grid.axes[d];
        let shift_f = p / ax.spacing();
        let shift = shift_f.round();
        if (shift_f - shift).abs() > lit(1e-6) || shift < T::one() {
            return Err(Error::InvalidInput(format!("period of axis {d} is not a multiple of the node spacing")));
        }
        let shift = shift.to_usize().unwrap_or(usize::MAX);
        if shift > ax.intervals {
            return Err(Error::InvalidInput(format!("period of axis {d} exceeds the grid")));
        }
        for idx in 0..grid.node_count() {
            let multi = grid.multi_index(idx);
            if multi[d] + shift > ax.intervals {
                continue;
            }
            let mut other = multi.clone();
            other[d] += shift;
            let dev = dist(&graph.h_values[idx], &graph.h_values[grid.flat_index(&other)]);
            samples += 1;
            if dev > worst.0 || dev.is_nan() {
                worst = (dev, idx);
            }
        }
    }
    if samples == 0 {
        return Err(Error::EmptyDomain("no periodic axis to audit".into()));
    }
    let p = Point { a: graph.h_values[worst.1].clone(), z: grid.node(worst.1) };
    Ok(CheckReport::from_margin(Inequality::Periodicity, tol - worst.0, p, samples))
}
