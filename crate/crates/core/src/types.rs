//! Points, cones, box domains and the split vector-field abstraction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypotheses::rates_from_jacobian;
use crate::linalg::Matrix;
use crate::scalar::{all_finite, lit, Real};

/// A state `x = (a, z)` with expanding part `a ∈ ℝⁿ` and slow part `z ∈ ℝᵐ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    pub a: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(a: Vec<T>, z: Vec<T>) -> Result<Self> {
        if a.is_empty() || z.is_empty() {
            return Err(Error::InvalidInput("a point needs n >= 1 and m >= 1".into()));
        }
        if !all_finite(&a) || !all_finite(&z) {
            return Err(Error::InvalidInput("point has non-finite entries".into()));
        }
        Ok(Self { a, z })
    }

    /// Splits a flat state `(a, z)` after its first `n` entries.
    pub fn from_state(state: &[T], n: usize) -> Self {
        Self { a: state[..n].to_vec(), z: state[n..].to_vec() }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn to_state(&self) -> Vec<T> {
        let mut s = self.a.clone();
        s.extend_from_slice(&self.z);
        s
    }
}

fn check_same_dims<T: Real>(x1: &Point<T>, x2: &Point<T>) -> Result<()> {
    if x1.n() != x2.n() {
        return Err(Error::DimensionMismatch { expected: x1.n(), got: x2.n() });
    }
    if x1.m() != x2.m() {
        return Err(Error::DimensionMismatch { expected: x1.m(), got: x2.m() });
    }
    Ok(())
}

/// Indefinite cone gauge `‖a₂ − a₁‖² − ‖z₂ − z₁‖²`.
pub fn cone_gauge<T: Real>(x1: &Point<T>, x2: &Point<T>) -> Result<T> {
    check_same_dims(x1, x2)?;
    Ok(gauge_slices(&x1.a, &x1.z, &x2.a, &x2.z))
}

pub(crate) fn gauge_slices<T: Real>(a1: &[T], z1: &[T], a2: &[T], z2: &[T]) -> T {
    let da: T = a1.iter().zip(a2).map(|(&p, &q)| (q - p) * (q - p)).sum();
    let dz: T = z1.iter().zip(z2).map(|(&p, &q)| (q - p) * (q - p)).sum();
    da - dz
}

/// Whether `x` lies in the closed cone with the given vertex.
pub fn in_cone<T: Real>(vertex: &Point<T>, x: &Point<T>) -> Result<bool> {
    Ok(cone_gauge(x, vertex)? >= T::zero())
}

/// Extent of one slow coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZBound<T> {
    Finite { lo: T, hi: T },
    /// Unbounded direction; `window` is the slab used whenever sampling is needed.
    Unbounded { window: (T, T) },
    /// Periodic direction with canonical representatives in `[0, period)`.
    Periodic { period: T },
}

impl<T: Real> ZBound<T> {
    /// Sampling interval and whether its upper end is a distinct sample point.
    pub fn sample_range(&self) -> (T, T, bool) {
        match *self {
            ZBound::Finite { lo, hi } => (lo, hi, true),
            ZBound::Unbounded { window } => (window.0, window.1, true),
            ZBound::Periodic { period } => (T::zero(), period, false),
        }
    }

    pub fn period(&self) -> Option<T> {
        match *self {
            ZBound::Periodic { period } => Some(period),
            _ => None,
        }
    }

    pub fn canonical(&self, z: T) -> T {
        match *self {
            ZBound::Periodic { period } => {
                let r = z % period;
                if r < T::zero() {
                    r + period
                } else {
                    r
                }
            }
            _ => z,
        }
    }
}

/// Which side of an interval a face sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Lower,
    Upper,
}

/// A boundary face of a box domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    A { index: usize, side: Side },
    Z { index: usize, side: Side },
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, i, s) = match *self {
            Face::A { index, side } => ('a', index, side),
            Face::Z { index, side } => ('z', index, side),
        };
        let s = if s == Side::Lower { "lo" } else { "hi" };
        write!(f, "{c}{i}:{s}")
    }
}

/// Open box `∏(lo, hi) × ∏ Z-extent`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain<T> {
    pub a_bounds: Vec<(T, T)>,
    pub z_bounds: Vec<ZBound<T>>,
}

impl<T: Real> BoxDomain<T> {
    pub fn new(a_bounds: Vec<(T, T)>, z_bounds: Vec<ZBound<T>>) -> Result<Self> {
        if a_bounds.is_empty() || z_bounds.is_empty() {
            return Err(Error::EmptyDomain("need at least one a and one z coordinate".into()));
        }
        for (i, &(lo, hi)) in a_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(Error::EmptyDomain(format!("a{i} interval is empty")));
            }
        }
        for (i, zb) in z_bounds.iter().enumerate() {
            let ok = match *zb {
                ZBound::Finite { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
                ZBound::Unbounded { window } => {
                    window.0.is_finite() && window.1.is_finite() && window.0 < window.1
                }
                ZBound::Periodic { period } => period.is_finite() && period > T::zero(),
            };
            if !ok {
                return Err(Error::EmptyDomain(format!("z{i} extent is invalid")));
            }
        }
        Ok(Self { a_bounds, z_bounds })
    }

    pub fn n(&self) -> usize {
        self.a_bounds.len()
    }

    pub fn m(&self) -> usize {
        self.z_bounds.len()
    }

    pub fn a_is_bounded(&self) -> bool {
        self.a_bounds.iter().all(|&(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    /// Membership in the closure of the box.
    pub fn contains_closed(&self, a: &[T], z: &[T]) -> bool {
        let a_ok = self.a_bounds.iter().zip(a).all(|(&(lo, hi), &x)| x >= lo && x <= hi);
        let z_ok = self.z_bounds.iter().zip(z).all(|(b, &x)| match *b {
            ZBound::Finite { lo, hi } => x >= lo && x <= hi,
            _ => true,
        });
        a_ok && z_ok
    }

    /// Signed distance into the box for every face that can be crossed:
    /// positive inside, negative once the face has been crossed.
    pub fn face_distances(&self, a: &[T], z: &[T], a_only: bool) -> Vec<(Face, T)> {
        let mut out = Vec::with_capacity(2 * (self.n() + self.m()));
        for (i, &(lo, hi)) in self.a_bounds.iter().enumerate() {
            if lo.is_finite() {
                out.push((Face::A { index: i, side: Side::Lower }, a[i] - lo));
            }
            if hi.is_finite() {
                out.push((Face::A { index: i, side: Side::Upper }, hi - a[i]));
            }
        }
        if !a_only {
            for (i, b) in self.z_bounds.iter().enumerate() {
                if let ZBound::Finite { lo, hi } = *b {
                    out.push((Face::Z { index: i, side: Side::Lower }, z[i] - lo));
                    out.push((Face::Z { index: i, side: Side::Upper }, hi - z[i]));
                }
            }
        }
        out
    }

    pub fn periods(&self) -> Vec<Option<T>> {
        self.z_bounds.iter().map(ZBound::period).collect()
    }
}

/// Smallest `d` with `C(x) ∩ U ⊂ B_d(x)` for every `x ∈ U`.
///
/// Inside a cone `‖z′ − z‖ ≤ ‖a′ − a‖ ≤ diam_a(U)`, so the Euclidean diameter
/// of the a-box is the answer and the z-extent never matters.
pub fn hyp1_bound<T: Real>(domain: &BoxDomain<T>) -> Result<T> {
    let mut sq = T::zero();
    for (i, &(lo, hi)) in domain.a_bounds.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::UnboundedA(i));
        }
        sq = sq + (hi - lo) * (hi - lo);
    }
    Ok(sq.sqrt())
}

/// Jacobian blocks `D_a f` (n×n), `D_z f` (n×m), `D_a g` (m×n), `D_z g` (m×m).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianBlocks<T> {
    pub aa: Matrix<T>,
    pub az: Matrix<T>,
    pub za: Matrix<T>,
    pub zz: Matrix<T>,
}

impl<T: Real> JacobianBlocks<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            aa: Matrix::zeros(n, n),
            az: Matrix::zeros(n, m),
            za: Matrix::zeros(m, n),
            zz: Matrix::zeros(m, m),
        }
    }

    /// Assembled `(n+m)×(n+m)` Jacobian of the full field.
    pub fn full(&self) -> Matrix<T> {
        let n = self.aa.rows();
        let m = self.zz.rows();
        let mut j = Matrix::zeros(n + m, n + m);
        j.set_block(0, 0, &self.aa);
        j.set_block(0, n, &self.az);
        j.set_block(n, 0, &self.za);
        j.set_block(n, n, &self.zz);
        j
    }

    pub fn check_shapes(&self, n: usize, m: usize) -> Result<()> {
        let ok = self.aa.shape() == (n, n)
            && self.az.shape() == (n, m)
            && self.za.shape() == (m, n)
            && self.zz.shape() == (m, m);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!("Jacobian blocks do not match n = {n}, m = {m}")))
        }
    }
}

/// Default finite-difference scale: `1e-6` in double precision.
pub fn default_fd_step<T: Real>() -> T {
    T::epsilon().cbrt() * lit(0.165)
}

/// Vector field in split form `ȧ = f(a, z)`, `ż = g(a, z)`.
pub trait SplitField<T: Real>: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn f(&self, a: &[T], z: &[T]) -> Vec<T>;
    fn g(&self, a: &[T], z: &[T]) -> Vec<T>;

    /// Closed-form Jacobian blocks, when the field knows them.
    fn analytic_jacobian(&self, _a: &[T], _z: &[T]) -> Option<JacobianBlocks<T>> {
        None
    }

    /// Relative step for central differences.
    fn fd_step(&self) -> T {
        default_fd_step()
    }

    fn jacobian(&self, a: &[T], z: &[T]) -> JacobianBlocks<T> {
        self.analytic_jacobian(a, z)
            .unwrap_or_else(|| fd_jacobian(self, a, z, self.fd_step()))
    }

    /// Full field on a flat state `(a, z)`.
    fn eval_state(&self, state: &[T]) -> Vec<T> {
        let (a, z) = state.split_at(self.n());
        let mut out = self.f(a, z);
        out.extend(self.g(a, z));
        out
    }
}

/// Central-difference Jacobian blocks with per-coordinate step `eta·(1 + |xᵢ|)`.
pub fn fd_jacobian<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    a: &[T],
    z: &[T],
    eta: T,
) -> JacobianBlocks<T> {
    let n = field.n();
    let m = field.m();
    let two = lit::<T>(2.0);
    let mut jb = JacobianBlocks::zeros(n, m);
    let mut ap = a.to_vec();
    for j in 0..n {
        let h = eta * (T::one() + a[j].abs());
        ap[j] = a[j] + h;
        let (fp, gp) = (field.f(&ap, z), field.g(&ap, z));
        ap[j] = a[j] - h;
        let (fm, gm) = (field.f(&ap, z), field.g(&ap, z));
        ap[j] = a[j];
        for i in 0..n {
            jb.aa[(i, j)] = (fp[i] - fm[i]) / (two * h);
        }
        for i in 0..m {
            jb.za[(i, j)] = (gp[i] - gm[i]) / (two * h);
        }
    }
    let mut zp = z.to_vec();
    for j in 0..m {
        let h = eta * (T::one() + z[j].abs());
        zp[j] = z[j] + h;
        let (fp, gp) = (field.f(a, &zp), field.g(a, &zp));
        zp[j] = z[j] - h;
        let (fm, gm) = (field.f(a, &zp), field.g(a, &zp));
        zp[j] = z[j];
        for i in 0..n {
            jb.az[(i, j)] = (fp[i] - fm[i]) / (two * h);
        }
        for i in 0..m {
            jb.zz[(i, j)] = (gp[i] - gm[i]) / (two * h);
        }
    }
    jb
}

type ComponentFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;
type JacobianFn<T> = Arc<dyn Fn(&[T], &[T]) -> JacobianBlocks<T> + Send + Sync>;

/// Split field assembled from closures.
#[derive(Clone)]
pub struct FnField<T: Real> {
    n: usize,
    m: usize,
    f: ComponentFn<T>,
    g: ComponentFn<T>,
    jac: Option<JacobianFn<T>>,
    fd_step: T,
}

impl<T: Real> FnField<T> {
    pub fn new(
        n: usize,
        m: usize,
        f: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
        g: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self { n, m, f: Arc::new(f), g: Arc::new(g), jac: None, fd_step: default_fd_step() }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&[T], &[T]) -> JacobianBlocks<T> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_fd_step(mut self, step: T) -> Self {
        self.fd_step = step;
        self
    }
}

impl<T: Real> SplitField<T> for FnField<T> {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn f(&self, a: &[T], z: &[T]) -> Vec<T> {
        (self.f)(a, z)
    }
    fn g(&self, a: &[T], z: &[T]) -> Vec<T> {
        (self.g)(a, z)
    }
    fn analytic_jacobian(&self, a: &[T], z: &[T]) -> Option<JacobianBlocks<T>> {
        self.jac.as_ref().map(|j| j(a, z))
    }
    fn fd_step(&self) -> T {
        self.fd_step
    }
}

/// The time-reversed field `(−f, −g)`.
#[derive(Clone)]
pub struct Reversed<F>(pub F);

impl<T: Real, F: SplitField<T>> SplitField<T> for Reversed<F> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn m(&self) -> usize {
        self.0.m()
    }
    fn f(&self, a: &[T], z: &[T]) -> Vec<T> {
        self.0.f(a, z).into_iter().map(|x| -x).collect()
    }
    fn g(&self, a: &[T], z: &[T]) -> Vec<T> {
        self.0.g(a, z).into_iter().map(|x| -x).collect()
    }
    fn analytic_jacobian(&self, a: &[T], z: &[T]) -> Option<JacobianBlocks<T>> {
        self.0.analytic_jacobian(a, z).map(|j| JacobianBlocks {
            aa: -&j.aa,
            az: -&j.az,
            za: -&j.za,
            zz: -&j.zz,
        })
    }
    fn fd_step(&self) -> T {
        self.0.fd_step()
    }
}

impl<T: Real, F: SplitField<T> + ?Sized> SplitField<T> for Arc<F> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn m(&self) -> usize {
        (**self).m()
    }
    fn f(&self, a: &[T], z: &[T]) -> Vec<T> {
        (**self).f(a, z)
    }
    fn g(&self, a: &[T], z: &[T]) -> Vec<T> {
        (**self).g(a, z)
    }
    fn analytic_jacobian(&self, a: &[T], z: &[T]) -> Option<JacobianBlocks<T>> {
        (**self).analytic_jacobian(a, z)
    }
    fn fd_step(&self) -> T {
        (**self).fd_step()
    }
}

/// Pointwise rate values at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates<T> {
    pub alpha: T,
    pub ell: T,
    pub dzf_norm: T,
    pub dag_norm: T,
}

pub type RateFn<T> = Arc<dyn Fn(&[T], &[T]) -> Rates<T> + Send + Sync>;

/// Rate functions plus the constants `c₁`, `c_r`, `η` and target order `r`.
///
/// Rates come from a user-supplied closed form when one is attached;
/// otherwise they are derived pointwise from the Jacobian blocks.
#[derive(Clone)]
pub struct RateProfile<T: Real> {
    pub closed_form: Option<RateFn<T>>,
    pub c1: T,
    pub cr: T,
    pub eta: T,
    pub r: u32,
}

impl<T: Real> RateProfile<T> {
    pub fn pointwise(c1: T, cr: T, eta: T, r: u32) -> Result<Self> {
        if !(c1 > T::zero() && cr > T::zero() && eta > T::zero()) {
            return Err(Error::InvalidInput("c1, cr and eta must be positive".into()));
        }
        Ok(Self { closed_form: None, c1, cr, eta, r })
    }

    pub fn with_closed_form(
        mut self,
        rates: impl Fn(&[T], &[T]) -> Rates<T> + Send + Sync + 'static,
    ) -> Self {
        self.closed_form = Some(Arc::new(rates));
        self
    }

    pub fn rates_at<F: SplitField<T> + ?Sized>(&self, field: &F, a: &[T], z: &[T]) -> Result<Rates<T>> {
        match &self.closed_form {
            Some(rf) => Ok(rf(a, z)),
            None => rates_from_jacobian(&field.jacobian(a, z)),
        }
    }
}

impl<T: Real> fmt::Debug for RateProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateProfile")
            .field("closed_form", &self.closed_form.is_some())
            .field("c1", &self.c1)
            .field("cr", &self.cr)
            .field("eta", &self.eta)
            .field("r", &self.r)
            .finish()
    }
}
