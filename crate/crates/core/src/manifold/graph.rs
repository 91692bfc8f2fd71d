//! Graphs `z ↦ h(z)` stored on rectangular z-lattices.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{lit, to_f64, Real};
use crate::types::{BoxDomain, ZBound};

/// Anything that can be evaluated as `a = h(z)`.
pub trait GraphFn<T: Real>: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn h(&self, z: &[T]) -> Result<Vec<T>>;

    /// z-extent the graph is defined on, when known.
    fn z_bounds(&self) -> Option<Vec<ZBound<T>>> {
        None
    }

    /// Largest stored `‖Dh‖`, when derivative samples exist.
    fn max_dh_norm(&self) -> Option<T> {
        None
    }
}

/// Closed-form graph.
#[derive(Clone)]
pub struct FnGraph<T: Real> {
    n: usize,
    m: usize,
    h: Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>,
    z_bounds: Option<Vec<ZBound<T>>>,
}

impl<T: Real> FnGraph<T> {
    pub fn new(n: usize, m: usize, h: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self { n, m, h: Arc::new(h), z_bounds: None }
    }

    pub fn with_z_bounds(mut self, b: Vec<ZBound<T>>) -> Self {
        self.z_bounds = Some(b);
        self
    }
}

impl<T: Real> GraphFn<T> for FnGraph<T> {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn h(&self, z: &[T]) -> Result<Vec<T>> {
        Ok((self.h)(z))
    }
    fn z_bounds(&self) -> Option<Vec<ZBound<T>>> {
        self.z_bounds.clone()
    }
}

/// One lattice axis with `intervals + 1` equally spaced nodes on `[lo, hi]`.
///
/// A periodic axis spans exactly one period; its last node is the image of
/// the first and is stored separately so periodicity can be audited.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub intervals: usize,
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    pub fn spacing(&self) -> T {
        (self.hi - self.lo) / lit(self.intervals as f64)
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.intervals {
            self.hi
        } else {
            self.lo + self.spacing() * lit(i as f64)
        }
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Four stencil nodes and cubic Lagrange weights at `z`.
    fn stencil(&self, z: T) -> Result<([usize; 4], [T; 4])> {
        let nint = self.intervals;
        let h = self.spacing();
        let mut u = (z - self.lo) / h;
        let (start, s) = if self.periodic {
            let nf = lit::<T>(nint as f64);
            u = u % nf;
            if u < T::zero() {
                u = u + nf;
            }
            let mut i = u.floor().to_usize().unwrap_or(0);
            if i >= nint {
                i = nint - 1;
            }
            let s = u - lit(i as f64) + T::one();
            ((i + nint - 1) % nint, s)
        } else {
            let slack = lit::<T>(1e-9) * lit(nint as f64);
            let nf = lit::<T>(nint as f64);
            if !(u >= -slack && u <= nf + slack) {
                return Err(Error::OutsideCoverage(format!(
                    "z = {} outside [{}, {}]",
                    to_f64(z),
                    to_f64(self.lo),
                    to_f64(self.hi)
                )));
            }
            let i = u.floor().to_isize().unwrap_or(0).clamp(1, nint as isize - 2) as usize;
            (i - 1, u - lit((i - 1) as f64))
        };
        let one = T::one();
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let six = lit::<T>(6.0);
        let w = [
            -(s - one) * (s - two) * (s - three) / six,
            s * (s - two) * (s - three) / two,
            -s * (s - one) * (s - three) / two,
            s * (s - one) * (s - two) / six,
        ];
        let idx = if self.periodic {
            [start, (start + 1) % nint, (start + 2) % nint, (start + 3) % nint]
        } else {
            [start, start + 1, start + 2, start + 3]
        };
        Ok((idx, w))
    }
}

/// Tensor lattice of z-nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ZGrid<T> {
    pub axes: Vec<Axis<T>>,
}

impl<T: Real> ZGrid<T> {
    pub fn new(axes: Vec<Axis<T>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyDomain("grid needs at least one axis".into()));
        }
        for (i, ax) in axes.iter().enumerate() {
            let min = if ax.periodic { 4 } else { 3 };
            if ax.intervals < min || !(ax.lo < ax.hi) {
                return Err(Error::InvalidInput(format!("axis {i} needs lo < hi and at least {min} intervals")));
            }
        }
        Ok(Self { axes })
    }

    /// Lattice over the z-extent of `domain` with the given interval counts.
    pub fn over(domain: &BoxDomain<T>, intervals: &[usize]) -> Result<Self> {
        if intervals.len() != domain.m() {
            return Err(Error::DimensionMismatch { expected: domain.m(), got: intervals.len() });
        }
        let axes = domain
            .z_bounds
            .iter()
            .zip(intervals)
            .map(|(b, &k)| {
                let (lo, hi, _) = b.sample_range();
                Axis { lo, hi, intervals: k, periodic: matches!(b, ZBound::Periodic { .. }) }
            })
            .collect();
        Self::new(axes)
    }

    pub fn m(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Multi-index of flat node `idx` (last axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = idx % ax.len();
            idx /= ax.len();
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.axes).fold(0, |acc, (&i, ax)| acc * ax.len() + i)
    }

    pub fn node(&self, idx: usize) -> Vec<T> {
        self.multi_index(idx).iter().zip(&self.axes).map(|(&i, ax)| ax.node(i)).collect()
    }

    pub fn z_bounds(&self) -> Vec<ZBound<T>> {
        self.axes
            .iter()
            .map(|ax| {
                if ax.periodic {
                    ZBound::Periodic { period: ax.hi - ax.lo }
                } else {
                    ZBound::Finite { lo: ax.lo, hi: ax.hi }
                }
            })
            .collect()
    }
}

/// Sampled graph `Γ = {(h(z), z)}` with optional derivative samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphManifold<T> {
    pub grid: ZGrid<T>,
    /// Domain the graph was computed in; its a-box bounds the graph values.
    pub domain: BoxDomain<T>,
    pub h_values: Vec<Vec<T>>,
    pub dh_values: Option<Vec<Matrix<T>>>,
    /// Per-node defect left by the construction (bracket width or last update).
    pub node_residual: Vec<T>,
    /// Largest entry of `node_residual`.
    pub residual: T,
    /// Nodes whose value could not be determined.
    pub unresolved: Vec<usize>,
}

impl<T: Real> GraphManifold<T> {
    pub fn new(grid: ZGrid<T>, domain: BoxDomain<T>, h_values: Vec<Vec<T>>, node_residual: Vec<T>) -> Result<Self> {
        let count = grid.node_count();
        if h_values.len() != count || node_residual.len() != count {
            return Err(Error::DimensionMismatch { expected: count, got: h_values.len() });
        }
        if grid.m() != domain.m() {
            return Err(Error::DimensionMismatch { expected: domain.m(), got: grid.m() });
        }
        if h_values.iter().any(|h| h.len() != domain.n()) {
            return Err(Error::Shape("every node needs n graph values".into()));
        }
        let residual = node_residual.iter().fold(T::zero(), |m, &r| if r.is_nan() { m } else { m.max(r) });
        Ok(Self { grid, domain, h_values, dh_values: None, node_residual, residual, unresolved: Vec::new() })
    }

    /// Samples a closed-form `h` on the grid (zero residual).
    pub fn from_fn(grid: ZGrid<T>, domain: BoxDomain<T>, h: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| h(&grid.node(i))).collect();
        let res = vec![T::zero(); grid.node_count()];
        Self::new(grid, domain, values, res)
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn m(&self) -> usize {
        self.grid.m()
    }

    pub fn z_bounds_vec(&self) -> &[ZBound<T>] {
        &self.domain.z_bounds
    }

    /// Tensor-product cubic interpolant of the node values.
    pub fn eval(&self, z: &[T]) -> Result<Vec<T>> {
        if z.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: z.len() });
        }
        let mut stencils = Vec::with_capacity(self.m());
        for (ax, &zi) in self.grid.axes.iter().zip(z) {
            stencils.push(ax.stencil(zi)?);
        }
        let n = self.n();
        let mut out = vec![T::zero(); n];
        let terms = 4usize.pow(self.m() as u32);
        let mut multi = vec![0usize; self.m()];
        for t in 0..terms {
            let mut k = t;
            let mut w = T::one();
            for d in (0..self.m()).rev() {
                let j = k % 4;
                k /= 4;
                multi[d] = stencils[d].0[j];
                w = w * stencils[d].1[j];
            }
            let hv = &self.h_values[self.grid.flat_index(&multi)];
            for i in 0..n {
                out[i] = out[i] + w * hv[i];
            }
        }
        Ok(out)
    }

    /// Central-difference Jacobian of the interpolant, step a fraction of the spacing.
    pub fn eval_jacobian_fd(&self, z: &[T]) -> Result<Matrix<T>> {
        let n = self.n();
        let m = self.m();
        let mut d = Matrix::zeros(n, m);
        let mut zp = z.to_vec();
        for j in 0..m {
            let ax = &self.grid.axes[j];
            let step = ax.spacing() * lit(1e-3);
            let (mut up, mut dn) = (z[j] + step, z[j] - step);
            if !ax.periodic {
                up = up.min(ax.hi);
                dn = dn.max(ax.lo);
            }
            zp[j] = up;
            let hp = self.eval(&zp)?;
            zp[j] = dn;
            let hm = self.eval(&zp)?;
            zp[j] = z[j];
            for i in 0..n {
                d[(i, j)] = (hp[i] - hm[i]) / (up - dn);
            }
        }
        Ok(d)
    }

    /// Largest stored `‖Dh‖` (spectral), `None` without derivative samples.
    /// Largest `‖Dh‖` over the nodes; without stored derivatives the
    /// interpolant is differentiated numerically.
    pub fn max_dh_norm_checked(&self) -> Result<Option<T>> {
        let mut best = T::zero();
        match &self.dh_values {
            Some(v) => {
                for d in v {
                    best = best.max(d.spectral_norm()?);
                }
            }
            None => {
                for i in 0..self.grid.node_count() {
                    best = best.max(self.eval_jacobian_fd(&self.grid.node(i))?.spectral_norm()?);
                }
            }
        }
        Ok(Some(best))
    }

    /// Delimited table: one row per node with z, h, optional Dh (row-major)
    /// and the node residual.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (i, ax) in self.grid.axes.iter().enumerate() {
            let _ = writeln!(
                s,
                "#! axis {i} lo={:.17e} hi={:.17e} intervals={} periodic={}",
                to_f64(ax.lo),
                to_f64(ax.hi),
                ax.intervals,
                ax.periodic
            );
        }
        for (i, &(lo, hi)) in self.domain.a_bounds.iter().enumerate() {
            let _ = writeln!(s, "#! abound {i} lo={:.17e} hi={:.17e}", to_f64(lo), to_f64(hi));
        }
        let (n, m) = (self.n(), self.m());
        let mut cols: Vec<String> = (0..m).map(|j| format!("z{j}")).collect();
        cols.extend((0..n).map(|i| format!("h{i}")));
        if self.dh_values.is_some() {
            for i in 0..n {
                for j in 0..m {
                    cols.push(format!("dh{i}_{j}"));
                }
            }
        }
        cols.push("residual".into());
        let _ = writeln!(s, "# {}", cols.join(","));
        for idx in 0..self.grid.node_count() {
            let mut row: Vec<String> = self.grid.node(idx).iter().map(|x| format!("{:.17e}", to_f64(*x))).collect();
            row.extend(self.h_values[idx].iter().map(|x| format!("{:.17e}", to_f64(*x))));
            if let Some(dh) = &self.dh_values {
                row.extend(dh[idx].as_slice().iter().map(|x| format!("{:.17e}", to_f64(*x))));
            }
            row.push(format!("{:.6e}", to_f64(self.node_residual[idx])));
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    /// Reads a table written by [`GraphManifold::to_table`].
    pub fn from_table(text: &str) -> Result<Self> {
        let perr = |msg: &str| Error::Parse(msg.to_string());
        let num = |s: &str| -> Result<T> {
            s.trim().parse::<f64>().map(lit).map_err(|_| Error::Parse(format!("bad number `{s}`")))
        };
        let field = |tok: &str, key: &str| -> Result<String> {
            tok.strip_prefix(key).map(str::to_string).ok_or_else(|| Error::Parse(format!("expected {key}")))
        };
        let mut axes = Vec::new();
        let mut abounds = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<T>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#!") {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.first() {
                    Some(&"axis") if toks.len() == 6 => axes.push(Axis {
                        lo: num(&field(toks[2], "lo=")?)?,
                        hi: num(&field(toks[3], "hi=")?)?,
                        intervals: field(toks[4], "intervals=")?.parse().map_err(|_| perr("bad interval count"))?,
                        periodic: field(toks[5], "periodic=")? == "true",
                    }),
                    Some(&"abound") if toks.len() == 4 => {
                        abounds.push((num(&field(toks[2], "lo=")?)?, num(&field(toks[3], "hi=")?)?))
                    }
                    _ => return Err(perr("unrecognised metadata line")),
                }
            } else if let Some(rest) = line.strip_prefix('#') {
                header = Some(rest.split(',').map(|c| c.trim().to_string()).collect());
            } else {
                rows.push(line.split(',').map(num).collect::<Result<_>>()?);
            }
        }
        let header = header.ok_or_else(|| perr("missing header"))?;
        let grid = ZGrid::new(axes)?;
        let z_bounds = grid.z_bounds();
        let domain = BoxDomain::new(abounds, z_bounds)?;
        let (n, m) = (domain.n(), grid.m());
        let has_dh = header.iter().any(|c| c.starts_with("dh"));
        let width = m + n + if has_dh { n * m } else { 0 } + 1;
        if header.len() != width || rows.iter().any(|r| r.len() != width) {
            return Err(perr("row width does not match the header"));
        }
        let h = rows.iter().map(|r| r[m..m + n].to_vec()).collect();
        let res = rows.iter().map(|r| r[width - 1]).collect();
        let mut g = Self::new(grid, domain, h, res)?;
        if has_dh {
            g.dh_values = Some(rows.iter().map(|r| Matrix::from_row_major(n, m, r[m + n..m + n + n * m].to_vec())).collect());
        }
        Ok(g)
    }
}

impl<T: Real> GraphFn<T> for GraphManifold<T> {
    fn n(&self) -> usize {
        self.domain.n()
    }
    fn m(&self) -> usize {
        self.grid.m()
    }
    fn h(&self, z: &[T]) -> Result<Vec<T>> {
        self.eval(z)
    }
    fn z_bounds(&self) -> Option<Vec<ZBound<T>>> {
        Some(self.domain.z_bounds.clone())
    }
    fn max_dh_norm(&self) -> Option<T> {
        self.max_dh_norm_checked().ok().flatten()
    }
}
