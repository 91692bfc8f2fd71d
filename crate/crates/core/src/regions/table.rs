//! Feasible `β`-intervals of the torus family.
//!
//! At fixed `β` all three slacks are concave in `(δ, k)`, so their minimum is
//! too and nested golden-section search finds its maximum.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Search box of the feasibility sweep.
pub const BETA_MAX: f64 = 10.0;
pub const DELTA_MAX: f64 = 4.0;
pub const K_MAX: f64 = 20.0;
pub const BETA_GRID: usize = 400;
pub const DELTA_GRID: usize = 200;
pub const K_GRID: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusFamilyParams {
    pub beta: f64,
    pub omega: f64,
    pub k: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl TorusFamilyParams {
    pub fn new(beta: f64, omega: f64, k: f64, gamma: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("k", k), ("gamma", gamma), ("delta", delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ParameterRange { name: name.into(), detail: format!("must be positive, got {v}") });
            }
        }
        if !omega.is_finite() {
            return Err(Error::ParameterRange { name: "omega".into(), detail: "must be finite".into() });
        }
        Ok(Self { beta, omega, k, gamma, delta })
    }
}

/// Slacks of the three defining inequalities; `order` is absent for `r = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub exit: f64,
    pub rates: f64,
    pub order: Option<f64>,
}

impl Membership {
    pub fn min_slack(&self) -> f64 {
        self.exit.min(self.rates).min(self.order.unwrap_or(f64::INFINITY))
    }

    pub fn member(&self) -> bool {
        self.min_slack() > 0.0
    }
}

fn slacks(beta: f64, delta: f64, k: f64, r: u32) -> Membership {
    let exit = delta * (8.0 * beta - delta) - 2.0;
    let rates = 8.0 * beta - 2.0 * delta - beta * beta - k - beta / k;
    let order = (r >= 2).then(|| {
        let r = r as f64;
        8.0 * beta - 2.0 * delta - r * beta * beta - (r + 1.0) * beta / k
    });
    Membership { exit, rates, order }
}

/// Slacks of `(β, δ, k)` for order `r`.
pub fn q_membership(beta: f64, delta: f64, k: f64, r: u32) -> Result<Membership> {
    for (name, v) in [("beta", beta), ("delta", delta), ("k", k)] {
        if !(v > 0.0) {
            return Err(Error::ParameterRange { name: name.into(), detail: format!("must be positive, got {v}") });
        }
    }
    if r == 0 {
        return Err(Error::ParameterRange { name: "r".into(), detail: "order starts at 1".into() });
    }
    Ok(slacks(beta, delta, k, r))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximiser of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn best_k(beta: f64, delta: f64, r: u32) -> (f64, f64) {
    golden_max(|k| slacks(beta, delta, k, r).min_slack(), 1e-9, K_MAX, 90)
}

fn polish(beta: f64, r: u32) -> (f64, f64, f64) {
    let (delta, _) = golden_max(|d| best_k(beta, d, r).1, 1e-9, DELTA_MAX, 90);
    let (k, s) = best_k(beta, delta, r);
    (delta, k, s)
}

fn grid_best(beta: f64, r: u32) -> (f64, f64, f64) {
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 1..=DELTA_GRID {
        let d = DELTA_MAX * i as f64 / DELTA_GRID as f64;
        for j in 1..=K_GRID {
            let k = K_MAX * j as f64 / K_GRID as f64;
            let s = slacks(beta, d, k, r).min_slack();
            if s > best.2 {
                best = (d, k, s);
            }
        }
    }
    best
}

/// Auxiliary `(δ, k)` maximising the smallest slack at `β`, with that slack.
pub fn best_auxiliary(beta: f64, r: u32) -> Result<(f64, f64, f64)> {
    if !(beta > 0.0) || r == 0 {
        return Err(Error::ParameterRange { name: "beta".into(), detail: "need beta > 0 and r >= 1".into() });
    }
    let g = grid_best(beta, r);
    let p = polish(beta, r);
    Ok(if p.2 >= g.2 { p } else { g })
}

fn feasibility(beta: f64, r: u32) -> f64 {
    polish(beta, r).2
}

/// `β`-projection of the feasible set for order `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionInterval {
    pub r: u32,
    /// `None` when no `β` in the search box is feasible.
    pub bounds: Option<(f64, f64)>,
    pub resolution: f64,
    /// Largest smallest-slack found over the box.
    pub best_slack: f64,
}

impl RegionInterval {
    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn to_record(&self) -> String {
        match self.bounds {
            Some((lo, hi)) => format!("r={} lo={lo:.6} hi={hi:.6} resolution={:e} empty=false", self.r, self.resolution),
            None => format!("r={} lo=nan hi=nan resolution={:e} empty=true", self.r, self.resolution),
        }
    }
}

impl fmt::Display for RegionInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

fn bisect(mut inside: f64, mut outside: f64, r: u32, resolution: f64) -> f64 {
    while (inside - outside).abs() > resolution {
        let mid = 0.5 * (inside + outside);
        if feasibility(mid, r) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Coarse sweep of `β ∈ (0, 10]`, then bisection of both endpoints to
/// `resolution`.
pub fn beta_projection(r: u32, resolution: f64) -> Result<RegionInterval> {
    if r == 0 {
        return Err(Error::ParameterRange { name: "r".into(), detail: "order starts at 1".into() });
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let betas: Vec<f64> = (1..=BETA_GRID).map(|i| BETA_MAX * i as f64 / BETA_GRID as f64).collect();
    let slack: Vec<f64> = betas.par_iter().map(|&b| grid_best(b, r).2.max(feasibility(b, r))).collect();
    let best_slack = slack.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = slack.iter().position(|&s| s > 0.0);
    let last = slack.iter().rposition(|&s| s > 0.0);
    let bounds = match (first, last) {
        (Some(i), Some(j)) => {
            let below = if i == 0 { 1e-9 } else { betas[i - 1] };
            let lo = bisect(betas[i], below, r, resolution * 0.01);
            let hi = if j + 1 < betas.len() { bisect(betas[j], betas[j + 1], r, resolution * 0.01) } else { BETA_MAX };
            Some((lo, hi))
        }
        _ => None,
    };
    Ok(RegionInterval { r, bounds, resolution, best_slack })
}
