//! Thresholds for persistence under weak hyperbolicity.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistenceConstants {
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub mu: f64,
    pub nu: f64,
    pub gamma_exp: f64,
    pub r: u32,
}

impl PersistenceConstants {
    pub fn new(sigma: f64, c: [f64; 4], mu: f64, nu: f64, gamma_exp: f64, r: u32) -> Result<Self> {
        let out = Self { sigma, c1: c[0], c2: c[1], c3: c[2], c4: c[3], mu, nu, gamma_exp, r };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, detail: &str| Err(Error::ParameterRange { name: name.into(), detail: detail.into() });
        if !(self.sigma > 0.0) {
            return bad("sigma", "must be positive");
        }
        if [self.c1, self.c2, self.c3, self.c4].iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return bad("C", "constants must be finite and nonnegative");
        }
        if self.r == 0 {
            return bad("r", "order starts at 1");
        }
        if !(self.mu > 0.0) {
            return bad("mu", "must be positive");
        }
        if !(self.gamma_exp > 0.0) {
            return bad("gamma", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return bad("nu", "must lie in [0, 1]");
        }
        if !(self.mu + self.nu > 1.0) {
            return bad("mu+nu", "need mu + nu > 1");
        }
        Ok(())
    }

    /// `[K₁, …, K₇]`.
    pub fn k(&self) -> [f64; 7] {
        let r = self.r as f64;
        [
            4.5 * (r + 1.0) * self.c2,
            (1.5 * r + 1.0) * self.c1,
            (6.0 * r + 5.5) * self.c4,
            r * self.c4,
            (1.5 * r + 1.0) * self.c4,
            (4.0 * r + 1.0) * self.c4,
            (4.0 * r + 1.0) * self.c4,
        ]
    }
}

/// `εσ − ε(K₁δ + K₂δ² + ε^μK₃ + ε^γK₄ + kε^μK₅ + (ε^{ν−1}K₆ + ε^γK₇)/k)`.
pub fn kappa(eps: f64, k: f64, delta: f64, c: &PersistenceConstants) -> f64 {
    let kk = c.k();
    let em = eps.powf(c.mu);
    let eg = eps.powf(c.gamma_exp);
    let corr = kk[0] * delta
        + kk[1] * delta * delta
        + em * kk[2]
        + eg * kk[3]
        + k * em * kk[4]
        + (eps.powf(c.nu - 1.0) * kk[5] + eg * kk[6]) / k;
    eps * c.sigma - eps * corr
}

/// The `k`-dependent part `kε^μK₅ + (ε^{ν−1}K₆ + ε^γK₇)/k`.
pub fn k_objective(eps: f64, k: f64, c: &PersistenceConstants) -> f64 {
    let kk = c.k();
    k * eps.powf(c.mu) * kk[4] + (eps.powf(c.nu - 1.0) * kk[5] + eps.powf(c.gamma_exp) * kk[6]) / k
}

/// Minimiser of [`k_objective`] over `k > 0`.
pub fn k_epsilon(eps: f64, c: &PersistenceConstants) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::ParameterRange { name: "eps".into(), detail: "must be positive".into() });
    }
    let kk = c.k();
    if kk[4] == 0.0 {
        return Err(Error::Degenerate("K5 = 0: the k-term has no minimiser".into()));
    }
    let num = eps.powf(c.nu - 1.0) * kk[5] + eps.powf(c.gamma_exp) * kk[6];
    if num == 0.0 {
        return Err(Error::Degenerate("K6 = K7 = 0: the k-term has no minimiser".into()));
    }
    Ok((num / (eps.powf(c.mu) * kk[4])).sqrt())
}

/// Value of [`k_objective`] at [`k_epsilon`].
pub fn k_objective_infimum(eps: f64, c: &PersistenceConstants) -> f64 {
    let kk = c.k();
    2.0 * (eps.powf(c.mu + c.nu - 1.0) * kk[4] * kk[5] + eps.powf(c.mu + c.gamma_exp) * kk[4] * kk[6]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub eps_star: f64,
    pub delta_star: f64,
    pub k_star: f64,
    /// `ε*` equals the search ceiling.
    pub at_ceiling: bool,
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eps_star={:.6e} delta_star={:.6e} k_star={:.6e} at_ceiling={}",
            self.eps_star, self.delta_star, self.k_star, self.at_ceiling
        )
    }
}

pub const EPS_CEILING: f64 = 1.0;
pub const EPS_FLOOR: f64 = 1e-12;

/// `δ = 2(C₃/σ)ε^μ` for the given `ε`.
pub fn delta_for(eps: f64, c: &PersistenceConstants) -> f64 {
    2.0 * c.c3 / c.sigma * eps.powf(c.mu)
}

fn feasible(eps: f64, c: &PersistenceConstants, delta_cap: f64) -> bool {
    let delta = delta_for(eps, c);
    if !(delta <= delta_cap) {
        return false;
    }
    let sign = c.sigma * delta - c.c1 * delta * delta - eps.powf(c.mu) * c.c3;
    let k = match k_epsilon(eps, c) {
        Ok(k) => k,
        Err(_) => return false,
    };
    kappa(eps, k, delta, c) > 0.0 && (sign > 0.0 || c.c3 == 0.0)
}

/// Largest `ε ≤ 1` at which both threshold conditions hold, with its `δ` and `k_ε`.
pub fn persistence_thresholds(c: &PersistenceConstants, delta_cap: f64) -> Result<Thresholds> {
    c.validate()?;
    if !(delta_cap > 0.0) {
        return Err(Error::InvalidInput("delta_cap must be positive".into()));
    }
    let finish = |eps: f64, at_ceiling: bool| -> Result<Thresholds> {
        Ok(Thresholds { eps_star: eps, delta_star: delta_for(eps, c), k_star: k_epsilon(eps, c)?, at_ceiling })
    };
    if feasible(EPS_CEILING, c, delta_cap) {
        return finish(EPS_CEILING, true);
    }
    // log grid downward from the ceiling, 20 points per decade
    let decades = -EPS_FLOOR.log10();
    let steps = (20.0 * decades) as usize;
    let mut above = EPS_CEILING;
    for i in 1..=steps {
        let eps = 10f64.powf(-(i as f64) / 20.0);
        if feasible(eps, c, delta_cap) {
            let (mut lo, mut hi) = (eps, above);
            for _ in 0..200 {
                if hi / lo - 1.0 < 1e-12 {
                    break;
                }
                let mid = (lo * hi).sqrt();
                if feasible(mid, c, delta_cap) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return finish(lo, false);
        }
        above = eps;
    }
    Err(Error::Infeasible(format!("no feasible eps above {EPS_FLOOR:e}")))
}
