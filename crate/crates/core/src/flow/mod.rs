//! The flow `Φ(t, x)`, its linearisation, the derivative Riccati flow and
//! the level-1 lift.

pub mod jordan;
pub mod lift;
pub mod ode;
pub mod riccati;
pub mod variational;
pub mod vectorize;

pub use jordan::jordan_rescale;
pub use lift::{default_sigma1, lift_level1, LiftedSystem};
pub use ode::{dopri5, Control, DenseStep, OdeOptions, OdeStats};
pub use riccati::{riccati_integrate, RiccatiPath};
pub use variational::{variational, variational_final, VariationalPath};
pub use vectorize::{kron, unvec, vec};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::types::{BoxDomain, Face, Point, SplitField};

/// Where and when a trajectory first crossed the domain boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitEvent<T> {
    pub time: T,
    pub face: Face,
    pub state: Point<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// Monotone in the direction of integration.
    pub times: Vec<T>,
    pub states: Vec<Point<T>>,
    pub exit_event: Option<ExitEvent<T>>,
    pub stats: OdeStats,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &Point<T> {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has at least one time")
    }
}

/// Knobs for [`integrate_with`].
#[derive(Clone, Copy, Debug)]
pub struct FlowOptions<'a, T> {
    pub tol: T,
    pub domain: Option<&'a BoxDomain<T>>,
    /// Only a-faces terminate the run (z-faces are ignored).
    pub a_faces_only: bool,
    /// Keep every accepted step; otherwise only the endpoints are stored.
    pub record_path: bool,
    /// Time resolution of the exit-time bisection.
    pub event_tol: T,
}

impl<'a, T: Real> FlowOptions<'a, T> {
    pub fn new(tol: T) -> Self {
        Self { tol, domain: None, a_faces_only: false, record_path: true, event_tol: lit(1e-10) }
    }

    pub fn in_domain(mut self, domain: &'a BoxDomain<T>) -> Self {
        self.domain = Some(domain);
        self
    }
}

/// Adaptive trajectory from `x0` over `[0, t_end]` (or `[t_end, 0]`), stopping
/// at the first boundary crossing when a domain is supplied.
pub fn integrate<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x0: &Point<T>,
    t_end: T,
    tol: T,
    domain: Option<&BoxDomain<T>>,
) -> Result<Trajectory<T>> {
    let mut opts = FlowOptions::new(tol);
    opts.domain = domain;
    integrate_with(field, x0, t_end, &opts)
}

fn check_dims<T: Real, F: SplitField<T> + ?Sized>(field: &F, x: &Point<T>) -> Result<()> {
    if x.n() != field.n() {
        return Err(Error::DimensionMismatch { expected: field.n(), got: x.n() });
    }
    if x.m() != field.m() {
        return Err(Error::DimensionMismatch { expected: field.m(), got: x.m() });
    }
    Ok(())
}

pub fn integrate_with<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    x0: &Point<T>,
    t_end: T,
    opts: &FlowOptions<'_, T>,
) -> Result<Trajectory<T>> {
    check_dims(field, x0)?;
    let n = field.n();
    if let Some(d) = opts.domain {
        if d.n() != n || d.m() != field.m() {
            return Err(Error::Shape("domain dimensions differ from the field".into()));
        }
        if !d.contains_closed(&x0.a, &x0.z) {
            return Err(Error::InvalidInput("initial point lies outside the domain".into()));
        }
    }
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let v = field.eval_state(y);
        dy.copy_from_slice(&v);
        Ok(())
    };
    let mut times = vec![T::zero()];
    let mut states = vec![x0.clone()];
    let mut exit = None;
    let ode_opts = OdeOptions::with_tol(opts.tol);
    let (t_fin, y_fin, stats) = dopri5(rhs, T::zero(), &x0.to_state(), t_end, &ode_opts, |step| {
        if let Some(d) = opts.domain {
            if let Some(ev) = locate_exit(d, step, n, opts.a_faces_only, opts.event_tol) {
                exit = Some(ev);
                return Ok(Control::Stop);
            }
        }
        if opts.record_path {
            times.push(step.t1());
            states.push(Point::from_state(&step.y1, n));
        }
        Ok(Control::Continue)
    })?;
    match exit {
        Some(ev) => {
            times.push(ev.time);
            states.push(ev.state.clone());
            exit = Some(ev);
        }
        None => {
            if !opts.record_path {
                times.push(t_fin);
                states.push(Point::from_state(&y_fin, n));
            }
        }
    }
    Ok(Trajectory { times, states, exit_event: exit, stats })
}

/// Earliest face crossed inside `step`, located by bisection on the dense output.
fn locate_exit<T: Real>(
    domain: &BoxDomain<T>,
    step: &DenseStep<T>,
    n: usize,
    a_only: bool,
    event_tol: T,
) -> Option<ExitEvent<T>> {
    let (a1, z1) = step.y1.split_at(n);
    let crossed: Vec<Face> = domain
        .face_distances(a1, z1, a_only)
        .into_iter()
        .filter(|&(_, d)| d < T::zero())
        .map(|(f, _)| f)
        .collect();
    if crossed.is_empty() {
        return None;
    }
    let dist_of = |face: Face, y: &[T]| -> T {
        let (a, z) = y.split_at(n);
        domain
            .face_distances(a, z, a_only)
            .into_iter()
            .find(|&(f, _)| f == face)
            .map(|(_, d)| d)
            .unwrap_or_else(T::zero)
    };
    let half = lit::<T>(0.5);
    let mut best: Option<(T, Face)> = None;
    for face in crossed {
        // time measured as a fraction of the step: 0 is inside, 1 is outside
        let (mut lo, mut hi) = (T::zero(), T::one());
        let res = event_tol / step.h.abs();
        while hi - lo > res {
            let mid = half * (lo + hi);
            let y = step.eval(step.t0 + mid * step.h);
            if dist_of(face, &y) < T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if best.map_or(true, |(s, _)| hi < s) {
            best = Some((hi, face));
        }
    }
    let (s, face) = best?;
    let time = step.t0 + s * step.h;
    let state = Point::from_state(&step.eval(time), n);
    Some(ExitEvent { time, face, state })
}
