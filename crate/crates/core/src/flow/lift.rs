//! Level-1 lift: the vectorised Riccati system on `ℝ^{nm} × K₁`.

use crate::error::{Error, Result};
use crate::hypotheses::{rates_from_jacobian, SampleGrid};
use crate::linalg::Matrix;
use crate::manifold::GraphFn;
use crate::scalar::{lit, Real};
use crate::types::{BoxDomain, SplitField, ZBound};

use super::vectorize::{kron, unvec, vec};

/// The lifted field `(f₁, γ₁)` in the coordinates `(v¹, ζ¹)`, `z = σ₁ζ¹`.
pub struct LiftedSystem<'a, T: Real, F: ?Sized, G: ?Sized> {
    base: &'a F,
    graph: &'a G,
    pub sigma1: T,
    pub eta: T,
    k0: Vec<ZBound<T>>,
}

fn scale_bound<T: Real>(b: &ZBound<T>, s: T) -> ZBound<T> {
    match *b {
        ZBound::Finite { lo, hi } => ZBound::Finite { lo: lo * s, hi: hi * s },
        ZBound::Unbounded { window } => ZBound::Unbounded { window: (window.0 * s, window.1 * s) },
        ZBound::Periodic { period } => ZBound::Periodic { period: period * s },
    }
}

pub fn lift_level1<'a, T, F, G>(
    field: &'a F,
    graph: &'a G,
    sigma1: T,
    eta: T,
) -> Result<LiftedSystem<'a, T, F, G>>
where
    T: Real,
    F: SplitField<T> + ?Sized,
    G: GraphFn<T> + ?Sized,
{
    if !(sigma1 > T::zero()) || !(eta > T::zero()) {
        return Err(Error::InvalidInput("sigma1 and eta must be positive".into()));
    }
    if graph.n() != field.n() || graph.m() != field.m() {
        return Err(Error::DimensionMismatch { expected: field.m(), got: graph.m() });
    }
    let k0 = graph
        .z_bounds()
        .ok_or_else(|| Error::OutsideCoverage("graph does not declare its z-extent".into()))?;
    if let Some(d) = graph.max_dh_norm() {
        if !(d < eta) {
            return Err(Error::Precondition(format!("sampled |Dh| = {d} is not below eta = {eta}")));
        }
    }
    Ok(LiftedSystem { base: field, graph, sigma1, eta, k0 })
}

impl<'a, T: Real, F: SplitField<T> + ?Sized, G: GraphFn<T> + ?Sized> LiftedSystem<'a, T, F, G> {
    fn base_z(&self, zeta: &[T]) -> Vec<T> {
        zeta.iter().map(|&x| x * self.sigma1).collect()
    }

    /// `J₁ × K₁`: every entry of `v¹` in `(−η, η)`, `ζ¹ ∈ K₀/σ₁`.
    pub fn domain(&self) -> Result<BoxDomain<T>> {
        let nm = self.base.n() * self.base.m();
        let inv = T::one() / self.sigma1;
        BoxDomain::new(vec![(-self.eta, self.eta); nm], self.k0.iter().map(|b| scale_bound(b, inv)).collect())
    }

    /// `f₁(v¹, ζ¹)` with the explicit Kronecker form.
    pub fn f1(&self, v: &[T], zeta: &[T]) -> Result<Vec<T>> {
        let (n, m) = (self.base.n(), self.base.m());
        let z = self.base_z(zeta);
        let a = self.graph.h(&z)?;
        let j = self.base.jacobian(&a, &z);
        let vm = unvec(v, n, m)?;
        let lin = &kron(&Matrix::identity(m), &j.aa) - &kron(&j.zz.transpose(), &Matrix::identity(n));
        let quad = kron(&Matrix::identity(m), &vm.matmul(&j.za)?);
        let mut out = lin.mul_vec(v)?;
        let q = quad.mul_vec(v)?;
        for ((o, qi), ci) in out.iter_mut().zip(q).zip(vec(&j.az)) {
            *o = *o - qi + ci;
        }
        Ok(out)
    }

    /// `γ₁(ζ¹) = g(h₀(σ₁ζ¹), σ₁ζ¹)/σ₁`.
    pub fn gamma1(&self, zeta: &[T]) -> Result<Vec<T>> {
        let z = self.base_z(zeta);
        let a = self.graph.h(&z)?;
        Ok(self.base.g(&a, &z).into_iter().map(|x| x / self.sigma1).collect())
    }

    /// `α₁ = α − ℓ − 2η‖D_a g‖` at the graph point over `σ₁ζ¹`.
    pub fn alpha1(&self, zeta: &[T]) -> Result<T> {
        let z = self.base_z(zeta);
        let a = self.graph.h(&z)?;
        let r = rates_from_jacobian(&self.base.jacobian(&a, &z))?;
        Ok(r.alpha - r.ell - lit::<T>(2.0) * self.eta * r.dag_norm)
    }

    /// `ℓ₁ = η‖D_a g‖ + ℓ`.
    pub fn ell1(&self, zeta: &[T]) -> Result<T> {
        let z = self.base_z(zeta);
        let a = self.graph.h(&z)?;
        let r = rates_from_jacobian(&self.base.jacobian(&a, &z))?;
        Ok(self.eta * r.dag_norm + r.ell)
    }
}

impl<'a, T, F, G> SplitField<T> for LiftedSystem<'a, T, F, G>
where
    T: Real,
    F: SplitField<T> + ?Sized,
    G: GraphFn<T> + ?Sized,
{
    fn n(&self) -> usize {
        self.base.n() * self.base.m()
    }
    fn m(&self) -> usize {
        self.base.m()
    }
    fn f(&self, a: &[T], z: &[T]) -> Vec<T> {
        self.f1(a, z).unwrap_or_else(|_| vec![T::nan(); a.len()])
    }
    fn g(&self, _a: &[T], z: &[T]) -> Vec<T> {
        self.gamma1(z).unwrap_or_else(|_| vec![T::nan(); z.len()])
    }
}

/// `σ₁ = c_r / (2 L₁)` with `L₁` the sampled supremum of `‖D_z f₁‖` at `σ₁ = 1`.
pub fn default_sigma1<T, F, G>(field: &F, graph: &G, eta: T, cr: T, density: usize) -> Result<T>
where
    T: Real,
    F: SplitField<T> + ?Sized,
    G: GraphFn<T> + ?Sized,
{
    let unit = lift_level1(field, graph, T::one(), eta)?;
    let grid = SampleGrid::over_z(&unit.k0, density);
    let nm = field.n() * field.m();
    let probes: Vec<Vec<T>> = vec![vec![T::zero(); nm], vec![eta * lit(0.99); nm], vec![-eta * lit(0.99); nm]];
    let step = crate::types::default_fd_step::<T>();
    let two = lit::<T>(2.0);
    let mut l1 = T::zero();
    for idx in 0..grid.len() {
        let z = grid.point(idx);
        for v in &probes {
            let mut d = Matrix::zeros(nm, z.len());
            let mut zp = z.clone();
            for j in 0..z.len() {
                let h = step * (T::one() + z[j].abs());
                zp[j] = z[j] + h;
                let fp = unit.f1(v, &zp)?;
                zp[j] = z[j] - h;
                let fm = unit.f1(v, &zp)?;
                zp[j] = z[j];
                for i in 0..nm {
                    d[(i, j)] = (fp[i] - fm[i]) / (two * h);
                }
            }
            l1 = l1.max(d.spectral_norm()?);
        }
    }
    if l1 == T::zero() {
        return Ok(T::one());
    }
    Ok(cr / (two * l1))
}
