//! Grid-sampled checks of the rate inequalities and C^r order certification.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::GraphManifold;
use crate::scalar::{lit, to_f64, Real};
use crate::types::{BoxDomain, JacobianBlocks, Point, RateProfile, Rates, SplitField, ZBound};

/// Highest order tried by [`max_certified_order`].
pub const ORDER_SCAN_CAP: u32 = 12;

/// Default number of samples per bounded dimension.
pub const DEFAULT_DENSITY: usize = 33;

/// Which inequality a report measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inequality {
    Hyp2,
    Hyp2Star { r: u32 },
    Hyp5 { r: u32 },
    Lipschitz,
    Periodicity,
    Separation,
    RapidOsc { r: u32 },
    DerivativeBound,
    IntersectLipschitz,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inequality::Hyp2 => write!(f, "hyp2"),
            Inequality::Hyp2Star { r } => write!(f, "hyp2star[r={r}]"),
            Inequality::Hyp5 { r } => write!(f, "hyp5[r={r}]"),
            Inequality::Lipschitz => write!(f, "lipschitz"),
            Inequality::Periodicity => write!(f, "periodicity"),
            Inequality::Separation => write!(f, "separation"),
            Inequality::RapidOsc { r } => write!(f, "rapid_osc[r={r}]"),
            Inequality::DerivativeBound => write!(f, "dh_bound"),
            Inequality::IntersectLipschitz => write!(f, "intersect_lipschitz"),
        }
    }
}

/// Outcome of one sampled inequality.
///
/// For reports over a parameter rather than a phase-space point the `a`
/// part of `worst_point` is empty and `z` carries the parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport<T> {
    pub passed: bool,
    pub margin: T,
    pub worst_point: Point<T>,
    pub samples: usize,
    pub inequality: Inequality,
    pub warnings: Vec<String>,
}

impl<T: Real> CheckReport<T> {
    pub fn from_margin(inequality: Inequality, margin: T, worst_point: Point<T>, samples: usize) -> Self {
        Self { passed: margin > T::zero(), margin, worst_point, samples, inequality, warnings: Vec::new() }
    }

    /// One-line `key=value` record.
    pub fn to_record(&self) -> String {
        let join = |v: &[T]| v.iter().map(|x| format!("{:.9e}", to_f64(*x))).collect::<Vec<_>>().join(",");
        let mut s = format!(
            "inequality={} passed={} margin={:.9e} samples={} worst_a={} worst_z={}",
            self.inequality,
            self.passed,
            to_f64(self.margin),
            self.samples,
            join(&self.worst_point.a),
            join(&self.worst_point.z),
        );
        for w in &self.warnings {
            s.push_str(&format!(" warning=\"{w}\""));
        }
        s
    }
}

impl<T: Real> fmt::Display for CheckReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

/// Tensor grid of sample points, one axis per coordinate.
#[derive(Clone, Debug)]
pub struct SampleGrid<T> {
    axes: Vec<Vec<T>>,
    pub warnings: Vec<String>,
}

fn linspace<T: Real>(lo: T, hi: T, count: usize, include_hi: bool) -> Vec<T> {
    if count <= 1 {
        return vec![lit::<T>(0.5) * (lo + hi)];
    }
    let denom = if include_hi { count - 1 } else { count };
    let step = (hi - lo) / lit(denom as f64);
    (0..count).map(|i| lo + step * lit(i as f64)).collect()
}

impl<T: Real> SampleGrid<T> {
    pub fn new(axes: Vec<Vec<T>>) -> Self {
        Self { axes, warnings: Vec::new() }
    }

    fn z_axes(z_bounds: &[ZBound<T>], density: usize, warnings: &mut Vec<String>) -> Vec<Vec<T>> {
        z_bounds
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if let ZBound::Unbounded { window } = b {
                    warnings.push(format!(
                        "z{i} is unbounded; sampled only on [{}, {}]",
                        to_f64(window.0),
                        to_f64(window.1)
                    ));
                }
                let (lo, hi, inc) = b.sample_range();
                linspace(lo, hi, density, inc)
            })
            .collect()
    }

    /// Closed a-box and one period (or the finite extent) of each z-axis.
    pub fn over_domain(domain: &BoxDomain<T>, density: usize) -> Result<Self> {
        if !domain.a_is_bounded() {
            let i = domain.a_bounds.iter().position(|&(lo, hi)| !lo.is_finite() || !hi.is_finite()).unwrap();
            return Err(Error::UnboundedA(i));
        }
        let density = density.max(1);
        let mut warnings = Vec::new();
        let mut axes: Vec<Vec<T>> =
            domain.a_bounds.iter().map(|&(lo, hi)| linspace(lo, hi, density, true)).collect();
        axes.extend(Self::z_axes(&domain.z_bounds, density, &mut warnings));
        Ok(Self { axes, warnings })
    }

    pub fn over_z(z_bounds: &[ZBound<T>], density: usize) -> Self {
        let mut warnings = Vec::new();
        let axes = Self::z_axes(z_bounds, density.max(1), &mut warnings);
        Self { axes, warnings }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point with mixed-radix index `idx` (last axis fastest).
    pub fn point(&self, mut idx: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        out
    }
}

/// Tightest rates from the Jacobian blocks; `ℓ` is clamped at zero.
pub fn rates_from_jacobian<T: Real>(j: &JacobianBlocks<T>) -> Result<Rates<T>> {
    Ok(Rates {
        alpha: j.aa.sym_min_eigenvalue()?,
        ell: j.zz.sym_max_eigenvalue()?.max(T::zero()),
        dzf_norm: j.az.spectral_norm()?,
        dag_norm: j.za.spectral_norm()?,
    })
}

/// `(α, ℓ, ‖D_z f‖, ‖D_a g‖)` at `x`.
pub fn pointwise_rates<T: Real, F: SplitField<T> + ?Sized>(field: &F, x: &Point<T>) -> Result<Rates<T>> {
    if x.n() != field.n() || x.m() != field.m() {
        return Err(Error::DimensionMismatch { expected: field.n() + field.m(), got: x.n() + x.m() });
    }
    rates_from_jacobian(&field.jacobian(&x.a, &x.z))
}

/// Rates at every sample of `grid`, in index order.
fn sample_rates<T, F>(field: &F, profile: Option<&RateProfile<T>>, grid: &SampleGrid<T>, n: usize) -> Result<Vec<(Vec<T>, Rates<T>)>>
where
    T: Real,
    F: SplitField<T> + ?Sized,
{
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            let (a, z) = p.split_at(n);
            let r = match profile {
                Some(pr) => pr.rates_at(field, a, z)?,
                None => rates_from_jacobian(&field.jacobian(a, z))?,
            };
            Ok((p, r))
        })
        .collect()
}

/// Smallest value with ties broken by the lower index.
fn argmin<T: Real>(values: impl Iterator<Item = T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.enumerate() {
        let v = if v.is_nan() { T::neg_infinity() } else { v };
        if best.map_or(true, |(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best
}

fn report_from_samples<T: Real>(
    inequality: Inequality,
    samples: &[(Vec<T>, Rates<T>)],
    n: usize,
    slack: impl Fn(&Rates<T>) -> T,
    warnings: Vec<String>,
) -> Result<CheckReport<T>> {
    let (i, margin) = argmin(samples.iter().map(|(_, r)| slack(r)))
        .ok_or_else(|| Error::EmptyDomain("no sample points".into()))?;
    let worst = Point::from_state(&samples[i].0, n);
    let mut rep = CheckReport::from_margin(inequality, margin, worst, samples.len());
    rep.warnings = warnings;
    Ok(rep)
}

pub(crate) fn hyp2_slack<T: Real>(r: &Rates<T>) -> T {
    r.alpha - r.ell - r.dzf_norm - r.dag_norm
}

pub(crate) fn hyp2star_slack<T: Real>(r: &Rates<T>, order: u32) -> T {
    let ord = lit::<T>(order as f64);
    let line4 = r.alpha - ord * r.ell - (ord + T::one()) * r.dag_norm;
    hyp2_slack(r).min(line4)
}

/// `min α − ℓ − ‖D_z f‖ − ‖D_a g‖ − c₁` over the sampled closed domain.
pub fn check_hyp2<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    c1: T,
) -> Result<CheckReport<T>> {
    check_hyp2_inner(field, domain, density, c1, None)
}

/// As [`check_hyp2`], taking rates and `c₁` from a profile.
pub fn check_hyp2_profile<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    profile: &RateProfile<T>,
) -> Result<CheckReport<T>> {
    check_hyp2_inner(field, domain, density, profile.c1, Some(profile))
}

fn check_hyp2_inner<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    c1: T,
    profile: Option<&RateProfile<T>>,
) -> Result<CheckReport<T>> {
    if !(c1 > T::zero()) {
        return Err(Error::InvalidInput("c1 must be positive".into()));
    }
    let grid = SampleGrid::over_domain(domain, density)?;
    let s = sample_rates(field, profile, &grid, domain.n())?;
    report_from_samples(Inequality::Hyp2, &s, domain.n(), |r| hyp2_slack(r) - c1, grid.warnings)
}

/// Both rate lines of the C^r hypothesis, each with the constant `c_r`.
pub fn check_hyp2star<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    r: u32,
    cr: T,
) -> Result<CheckReport<T>> {
    check_hyp2star_inner(field, domain, density, r, cr, None)
}

pub fn check_hyp2star_profile<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    profile: &RateProfile<T>,
) -> Result<CheckReport<T>> {
    check_hyp2star_inner(field, domain, density, profile.r, profile.cr, Some(profile))
}

fn check_hyp2star_inner<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    r: u32,
    cr: T,
    profile: Option<&RateProfile<T>>,
) -> Result<CheckReport<T>> {
    if r < 2 {
        return Err(Error::InvalidInput("the C^r check needs r >= 2".into()));
    }
    if !(cr > T::zero()) {
        return Err(Error::InvalidInput("cr must be positive".into()));
    }
    let grid = SampleGrid::over_domain(domain, density)?;
    let s = sample_rates(field, profile, &grid, domain.n())?;
    report_from_samples(Inequality::Hyp2Star { r }, &s, domain.n(), |x| hyp2star_slack(x, r) - cr, grid.warnings)
}

/// Options for [`check_hyp5`].
#[derive(Clone, Copy, Debug)]
pub struct Hyp5Options<T> {
    /// Half-width of the tube `U₀` in every a-direction.
    pub tube_radius: T,
    /// a-offsets sampled per a-direction across the tube.
    pub tube_samples: usize,
    /// The caller vouches that derivatives of order 2..=r are bounded on `U₀`.
    pub higher_derivatives_attested: bool,
}

impl<T: Real> Default for Hyp5Options<T> {
    fn default() -> Self {
        Self { tube_radius: lit(0.05), tube_samples: 3, higher_derivatives_attested: false }
    }
}

/// `min α − rℓ − (r+1)η‖D_a g‖ − c_r` on a tube around the graph.
///
/// With `eta = None` the constant is inferred as `1.01 · max ‖Dh‖` over the
/// graph nodes.
pub fn check_hyp5<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    graph: &GraphManifold<T>,
    eta: Option<T>,
    r: u32,
    cr: T,
    density: usize,
    opts: &Hyp5Options<T>,
) -> Result<CheckReport<T>> {
    if r < 2 {
        return Err(Error::InvalidInput("the C^r check needs r >= 2".into()));
    }
    let max_dh = graph.max_dh_norm_checked()?;
    let eta = match (eta, max_dh) {
        (Some(e), Some(d)) if !(d < e) => {
            return Err(Error::Precondition(format!(
                "sampled |Dh| = {} is not below eta = {}",
                to_f64(d),
                to_f64(e)
            )))
        }
        (Some(e), _) => e,
        (None, Some(d)) => d * lit(1.01),
        (None, None) => {
            return Err(Error::Precondition("eta must be given when the graph has no derivative samples".into()))
        }
    };
    let n = graph.n();
    let zgrid = SampleGrid::over_z(graph.z_bounds_vec(), density);
    let offsets = linspace(-opts.tube_radius, opts.tube_radius, opts.tube_samples.max(1), true);
    let per_z = offsets.len().pow(n as u32);
    let total = zgrid.len() * per_z;
    let samples: Vec<(Vec<T>, Rates<T>)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let z = zgrid.point(idx / per_z);
            let mut a = graph.eval(&z)?;
            let mut k = idx % per_z;
            for ai in a.iter_mut() {
                *ai = *ai + offsets[k % offsets.len()];
                k /= offsets.len();
            }
            let rates = rates_from_jacobian(&field.jacobian(&a, &z))?;
            let mut p = a;
            p.extend_from_slice(&z);
            Ok((p, rates))
        })
        .collect::<Result<_>>()?;
    let ord = lit::<T>(r as f64);
    let mut warnings = zgrid.warnings.clone();
    if !opts.higher_derivatives_attested {
        warnings.push(format!("boundedness of derivatives of order 2..={r} on the tube is not attested"));
    }
    report_from_samples(
        Inequality::Hyp5 { r },
        &samples,
        n,
        |x| x.alpha - ord * x.ell - (ord + T::one()) * eta * x.dag_norm - cr,
        warnings,
    )
}

/// Largest `r ≤` [`ORDER_SCAN_CAP`] for which every order `1..=r` holds with
/// margin at least `min_margin`; `0` when the first-order check already fails.
pub fn max_certified_order<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    density: usize,
    min_margin: T,
) -> Result<u32> {
    let grid = SampleGrid::over_domain(domain, density)?;
    let s = sample_rates(field, None, &grid, domain.n())?;
    let min_of = |f: &dyn Fn(&Rates<T>) -> T| s.iter().map(|(_, r)| f(r)).fold(T::infinity(), T::min);
    if !(min_of(&hyp2_slack) >= min_margin) {
        return Ok(0);
    }
    let mut best = 1;
    for r in 2..=ORDER_SCAN_CAP {
        if min_of(&|x| hyp2star_slack(x, r)) >= min_margin {
            best = r;
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FnField;

    fn toy() -> FnField<f64> {
        FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![2.0 * a[0] - z[0].sin()], |_a: &[f64], _z: &[f64]| vec![0.0])
    }

    fn toy_domain() -> BoxDomain<f64> {
        BoxDomain::new(vec![(-1.0, 1.0)], vec![ZBound::Periodic { period: std::f64::consts::TAU }]).unwrap()
    }

    #[test]
    fn toy_rates() {
        let x = Point::new(vec![0.3], vec![1.1]).unwrap();
        let r = pointwise_rates(&toy(), &x).unwrap();
        assert!((r.alpha - 2.0).abs() < 1e-8);
        assert_eq!(r.ell, 0.0);
        assert!((r.dzf_norm - 1.1f64.cos().abs()).abs() < 1e-8);
        assert_eq!(r.dag_norm, 0.0);
    }

    #[test]
    fn toy_hyp2_passes() {
        let rep = check_hyp2(&toy(), &toy_domain(), 33, 0.9).unwrap();
        assert!(rep.passed);
        assert!(rep.margin >= 0.1 - 1e-8);
        assert_eq!(rep.samples, 33 * 33);
    }

    #[test]
    fn no_slack_fails() {
        let f = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![a[0] - z[0]], |_a: &[f64], _z: &[f64]| vec![0.0]);
        let d = BoxDomain::new(vec![(-1.0, 1.0)], vec![ZBound::Finite { lo: -1.0, hi: 1.0 }]).unwrap();
        assert!(!check_hyp2(&f, &d, 9, 1e-6).unwrap().passed);
    }

    #[test]
    fn toy_order_hits_cap() {
        assert_eq!(max_certified_order(&toy(), &toy_domain(), 17, 1e-3).unwrap(), ORDER_SCAN_CAP);
    }

    #[test]
    fn record_has_fields() {
        let rep = check_hyp2(&toy(), &toy_domain(), 5, 0.5).unwrap();
        let s = rep.to_record();
        assert!(s.starts_with("inequality=hyp2 passed=true margin="));
    }

    #[test]
    fn grid_index_order() {
        let g = SampleGrid::new(vec![vec![0.0, 1.0], vec![10.0, 20.0, 30.0]]);
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), vec![0.0, 10.0]);
        assert_eq!(g.point(4), vec![1.0, 20.0]);
    }
}
