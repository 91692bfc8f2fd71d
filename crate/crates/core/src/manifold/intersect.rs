//! Intersection of two transverse graphs `p = P(q)` and `q = Q(p)` by
//! alternating substitution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypotheses::{CheckReport, Inequality};
use crate::scalar::{lit, to_f64, Real};
use crate::types::Point;

fn l1<T: Real>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |s, (x, y)| s + (*x - *y).abs())
}

#[derive(Clone, Debug)]
pub struct IntersectOptions<T> {
    pub max_iter: usize,
    /// Stop once the `‖·‖₁` step falls below this.
    pub tol: T,
    /// Box sampled by the Lipschitz audit of `P` (over q) and `Q` (over p).
    pub q_box: Vec<(T, T)>,
    pub p_box: Vec<(T, T)>,
    pub audit_pairs: usize,
}

#[derive(Clone, Debug)]
pub struct Intersection<T> {
    pub p: Vec<T>,
    pub q: Vec<T>,
    pub iterations: usize,
    /// `‖·‖₁` size of each update.
    pub steps: Vec<T>,
    /// Ratio of consecutive steps, bounded by the audited Lipschitz constant.
    pub ratios: Vec<T>,
    /// Margin `1/2 − max(Lip P, Lip Q)`; the worst point holds the sampled
    /// argument in `a` and its image in `z`.
    pub lipschitz: CheckReport<T>,
}

fn sample_box<T: Real>(rng: &mut ChaCha8Rng, b: &[(T, T)]) -> Vec<T> {
    b.iter().map(|&(lo, hi)| lo + (hi - lo) * lit(rng.gen::<f64>())).collect()
}

fn audit<T: Real>(
    map: &dyn Fn(&[T]) -> Result<Vec<T>>,
    b: &[(T, T)],
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(T, Vec<T>)> {
    let mut worst = (T::zero(), Vec::new());
    for _ in 0..pairs {
        let x = sample_box(rng, b);
        let y = sample_box(rng, b);
        let d = l1(&x, &y);
        if d > T::zero() {
            let r = l1(&map(&x)?, &map(&y)?) / d;
            if r > worst.0 || r.is_nan() {
                worst = (r, x);
            }
        }
    }
    Ok(worst)
}

/// Alternates `(p, q) ← (P(q), Q(p))` from `(p0, q0)`.
///
/// Both maps are first audited for Lipschitz constant at most `1/2` on the
/// configured boxes; the iteration is refused otherwise.
pub fn intersect_graphs<T: Real>(
    p_of_q: &dyn Fn(&[T]) -> Result<Vec<T>>,
    q_of_p: &dyn Fn(&[T]) -> Result<Vec<T>>,
    p0: &[T],
    q0: &[T],
    opts: &IntersectOptions<T>,
) -> Result<Intersection<T>> {
    if opts.p_box.len() != p0.len() || opts.q_box.len() != q0.len() {
        return Err(Error::Shape("audit boxes must match p and q".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e5);
    let (lp, wq) = audit(p_of_q, &opts.q_box, opts.audit_pairs, &mut rng)?;
    let (lq, wp) = audit(q_of_p, &opts.p_box, opts.audit_pairs, &mut rng)?;
    let half = lit::<T>(0.5);
    let worst = if lp >= lq { Point { z: p_of_q(&wq)?, a: wq } } else { Point { z: q_of_p(&wp)?, a: wp } };
    let lip = lp.max(lq);
    let lipschitz = CheckReport::from_margin(Inequality::IntersectLipschitz, half - lip, worst, 2 * opts.audit_pairs);
    if lip > half {
        return Err(Error::Precondition(format!(
            "sampled Lipschitz constants {} and {} exceed 1/2",
            to_f64(lp),
            to_f64(lq)
        )));
    }
    let (mut p, mut q) = (p0.to_vec(), q0.to_vec());
    let mut steps = Vec::new();
    let mut ratios = Vec::new();
    for _ in 0..opts.max_iter {
        let np = p_of_q(&q)?;
        let nq = q_of_p(&p)?;
        let step = l1(&np, &p) + l1(&nq, &q);
        if let Some(&prev) = steps.last() {
            if prev > T::zero() {
                ratios.push(step / prev);
            }
        }
        steps.push(step);
        p = np;
        q = nq;
        if !step.is_finite() {
            return Err(Error::Divergence("intersection iterate is not finite".into()));
        }
        // distance to the fixed point is at most L/(1 - L) times the last step
        if step < opts.tol || step * lip / (T::one() - lip) < opts.tol {
            return Ok(Intersection { p, q, iterations: steps.len(), steps, ratios, lipschitz });
        }
    }
    Err(Error::Divergence(format!("no convergence in {} iterations", opts.max_iter)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_pair() {
        let p = |q: &[f64]| Ok(vec![0.3 * q[0] + 0.1]);
        let q = |p: &[f64]| Ok(vec![-0.4 * p[0] + 0.2]);
        let opts = IntersectOptions { max_iter: 100, tol: 1e-14, q_box: vec![(-1.0, 1.0)], p_box: vec![(-1.0, 1.0)], audit_pairs: 50 };
        let out = intersect_graphs(&p, &q, &[0.0], &[0.0], &opts).unwrap();
        // p = 0.3(-0.4p + 0.2) + 0.1
        let ps = 0.16 / 1.12;
        assert!((out.p[0] - ps).abs() < 1e-12);
        assert!((out.q[0] - (-0.4 * ps + 0.2)).abs() < 1e-12);
        assert!(out.ratios.iter().all(|&r| r <= 0.5 + 1e-12));
        assert!((out.lipschitz.margin - 0.1).abs() < 1e-9);
    }

    #[test]
    fn steep_map_refused() {
        let p = |q: &[f64]| Ok(vec![0.9 * q[0]]);
        let q = |p: &[f64]| Ok(vec![0.1 * p[0]]);
        let opts = IntersectOptions { max_iter: 10, tol: 1e-12, q_box: vec![(-1.0, 1.0)], p_box: vec![(-1.0, 1.0)], audit_pairs: 10 };
        assert!(matches!(intersect_graphs(&p, &q, &[0.0], &[0.0], &opts), Err(Error::Precondition(_))));
    }
}
