//! Dormand–Prince 5(4) with PI step control and continuous output.

use crate::error::{Error, Result};
use crate::scalar::{all_finite, lit, to_f64, Real};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { rtol: tol, atol: tol, h_init: None, h_max: None, max_steps: 1_000_000 }
    }
}

/// Returned by step observers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// One accepted step together with its quartic-in-θ interpolant.
#[derive(Clone, Debug)]
pub struct DenseStep<T> {
    pub t0: T,
    pub h: T,
    pub y0: Vec<T>,
    pub y1: Vec<T>,
    rc: [Vec<T>; 4],
}

impl<T: Real> DenseStep<T> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    /// Continuous extension at `t` within the step.
    pub fn eval(&self, t: T) -> Vec<T> {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        (0..self.y0.len())
            .map(|i| {
                self.y0[i]
                    + theta
                        * (self.rc[0][i]
                            + theta1 * (self.rc[1][i] + theta * (self.rc[2][i] + theta1 * self.rc[3][i])))
            })
            .collect()
    }
}

struct Tableau<T> {
    c: [T; 6],
    a: [[T; 6]; 6],
    b: [T; 6],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let z = T::zero();
        let l = lit::<T>;
        Self {
            c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), T::one()],
            a: [
                [z; 6],
                [l(0.2), z, z, z, z, z],
                [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
                [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
                [l(19372.0 / 6561.0), l(-25360.0 / 2187.0), l(64448.0 / 6561.0), l(-212.0 / 729.0), z, z],
                [
                    l(9017.0 / 3168.0),
                    l(-355.0 / 33.0),
                    l(46732.0 / 5247.0),
                    l(49.0 / 176.0),
                    l(-5103.0 / 18656.0),
                    z,
                ],
            ],
            b: [l(35.0 / 384.0), z, l(500.0 / 1113.0), l(125.0 / 192.0), l(-2187.0 / 6784.0), l(11.0 / 84.0)],
            e: [
                l(71.0 / 57600.0),
                z,
                l(-71.0 / 16695.0),
                l(71.0 / 1920.0),
                l(-17253.0 / 339200.0),
                l(22.0 / 525.0),
                l(-1.0 / 40.0),
            ],
            d: [
                l(-12715105075.0 / 11282082432.0),
                z,
                l(87487479700.0 / 32700410799.0),
                l(-10690763975.0 / 1880347072.0),
                l(701980252875.0 / 199316789632.0),
                l(-1453857185.0 / 822651844.0),
                l(69997945.0 / 29380423.0),
            ],
        }
    }
}

fn rms_scaled<T: Real>(v: &[T], sk: &[T]) -> T {
    let n = lit::<T>(v.len().max(1) as f64);
    (v.iter().zip(sk).map(|(&x, &s)| (x / s) * (x / s)).sum::<T>() / n).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `on_step` sees every accepted step and may stop the integration early;
/// the returned pair is the state at the end of the last accepted step.
pub fn dopri5<T, F, O>(
    mut rhs: F,
    t0: T,
    y0: &[T],
    t_end: T,
    opts: &OdeOptions<T>,
    mut on_step: O,
) -> Result<(T, Vec<T>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    O: FnMut(&DenseStep<T>) -> Result<Control>,
{
    let dim = y0.len();
    let mut stats = OdeStats::default();
    if !all_finite(y0) {
        return Err(Error::NonFinite { t: to_f64(t0) });
    }
    if t_end == t0 || dim == 0 {
        return Ok((t0, y0.to_vec(), stats));
    }
    let tab = Tableau::<T>::new();
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_max = opts.h_max.unwrap_or(span).abs();

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); dim]; 7];
    rhs(t, &y, &mut k[0])?;
    stats.evals += 1;
    if !all_finite(&k[0]) {
        return Err(Error::NonFinite { t: to_f64(t) });
    }

    let sk_of = |ya: &[T], yb: &[T]| -> Vec<T> {
        ya.iter().zip(yb).map(|(&p, &q)| opts.atol + opts.rtol * p.abs().max(q.abs())).collect()
    };

    let mut h = match opts.h_init {
        Some(h) => h.abs().min(h_max),
        None => {
            let sk = sk_of(&y, &y);
            let d0 = rms_scaled(&y, &sk);
            let d1 = rms_scaled(&k[0], &sk);
            let mut h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
            h0 = h0.min(h_max);
            let y1: Vec<T> = (0..dim).map(|i| y[i] + dir * h0 * k[0][i]).collect();
            let mut f1 = vec![T::zero(); dim];
            rhs(t + dir * h0, &y1, &mut f1)?;
            stats.evals += 1;
            let diff: Vec<T> = (0..dim).map(|i| f1[i] - k[0][i]).collect();
            let d2 = rms_scaled(&diff, &sk) / h0;
            let dm = d1.max(d2);
            let h1 = if dm <= lit(1e-15) {
                (h0 * lit(1e-3)).max(lit(1e-6))
            } else {
                (lit::<T>(0.01) / dm).powf(lit(0.2))
            };
            (lit::<T>(100.0) * h0).min(h1).min(h_max)
        }
    };

    let safe = lit::<T>(0.9);
    let beta = lit::<T>(0.04);
    let expo1 = lit::<T>(0.2) - beta * lit(0.75);
    let facc1 = lit::<T>(5.0);
    let facc2 = lit::<T>(0.1);
    let mut facold = lit::<T>(1e-4);
    let mut reject = false;
    let mut last_trial_finite = true;
    let mut ytmp = vec![T::zero(); dim];
    let mut y1 = vec![T::zero(); dim];

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(h) });
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining * lit(0.999_999_999) {
            h = remaining;
            last = true;
        }
        let min_h = lit::<T>(16.0) * T::epsilon() * t.abs().max(span).max(T::one());
        if h < min_h {
            if !last_trial_finite {
                return Err(Error::NonFinite { t: to_f64(t) });
            }
            return Err(Error::StepUnderflow { t: to_f64(t), h: to_f64(h) });
        }
        let hs = dir * h;

        for s in 1..6 {
            for i in 0..dim {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + tab.a[s][j] * kj[i];
                }
                ytmp[i] = y[i] + hs * acc;
            }
            rhs(t + tab.c[s] * hs, &ytmp, &mut k[s])?;
            stats.evals += 1;
        }
        for i in 0..dim {
            let mut acc = T::zero();
            for j in 0..6 {
                acc = acc + tab.b[j] * k[j][i];
            }
            y1[i] = y[i] + hs * acc;
        }
        rhs(t + hs, &y1, &mut k[6])?;
        stats.evals += 1;

        let sk = sk_of(&y, &y1);
        let errv: Vec<T> = (0..dim)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..7 {
                    acc = acc + tab.e[j] * k[j][i];
                }
                hs * acc
            })
            .collect();
        let err = rms_scaled(&errv, &sk);

        if !err.is_finite() || !all_finite(&y1) || !all_finite(&k[6]) {
            last_trial_finite = false;
            stats.rejected += 1;
            reject = true;
            h = h * lit(0.2);
            continue;
        }
        last_trial_finite = true;

        let fac11 = err.powf(expo1);
        let mut fac = fac11 / facold.powf(beta);
        fac = facc2.max(facc1.min(fac / safe));
        let h_new = h / fac;

        if err <= T::one() {
            facold = err.max(lit(1e-4));
            stats.accepted += 1;
            let mut rc: [Vec<T>; 4] = [
                vec![T::zero(); dim],
                vec![T::zero(); dim],
                vec![T::zero(); dim],
                vec![T::zero(); dim],
            ];
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = hs * k[0][i] - ydiff;
                rc[0][i] = ydiff;
                rc[1][i] = bspl;
                rc[2][i] = ydiff - hs * k[6][i] - bspl;
                let mut acc = T::zero();
                for j in 0..7 {
                    acc = acc + tab.d[j] * k[j][i];
                }
                rc[3][i] = hs * acc;
            }
            let step = DenseStep { t0: t, h: hs, y0: y.clone(), y1: y1.clone(), rc };
            t = if last { t_end } else { t + hs };
            std::mem::swap(&mut y, &mut y1);
            k.swap(0, 6);
            let ctl = on_step(&step)?;
            if ctl == Control::Stop || last {
                return Ok((t, y, stats));
            }
            let mut hn = h_new.min(h_max);
            if reject {
                hn = hn.min(h);
            }
            reject = false;
            h = hn;
        } else {
            stats.rejected += 1;
            reject = true;
            h = h / facc1.min(fac11 / safe);
        }
    }
}
