//! Rapid-oscillation condition `Δ(σ) > ((r+1)/√r)·√L`.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypotheses::{CheckReport, Inequality, ORDER_SCAN_CAP};
use crate::types::Point;

pub type PeriodicFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default number of `σ` samples on `[0, 2π)`.
pub const RAPID_SAMPLES: usize = 4096;

/// `Δ`, `Λ` and their derivatives, with the derived extrema.
#[derive(Clone)]
pub struct RapidOscSpec {
    pub delta: PeriodicFn,
    pub d_delta: PeriodicFn,
    pub lambda: PeriodicFn,
    pub d_lambda: PeriodicFn,
    pub samples: usize,
    pub e1: f64,
    pub e2: f64,
    pub e: f64,
    pub l: f64,
    pub min_delta: f64,
    /// Where `Δ` is smallest.
    pub argmin_delta: f64,
}

impl std::fmt::Debug for RapidOscSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RapidOscSpec")
            .field("samples", &self.samples)
            .field("e1", &self.e1)
            .field("e2", &self.e2)
            .field("e", &self.e)
            .field("l", &self.l)
            .field("min_delta", &self.min_delta)
            .finish()
    }
}

/// Extremum of a sampled periodic function refined by a three-point parabola.
/// Returns `(value, location)`; `sign = 1` for a maximum, `-1` for a minimum.
fn extremum(f: &dyn Fn(f64) -> f64, samples: usize, sign: f64) -> (f64, f64) {
    let h = TAU / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|i| sign * f(i as f64 * h)).collect();
    let (i, &y0) = vals
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, (i, v)| if *v > *best.1 { (i, v) } else { best });
    let ym = vals[(i + samples - 1) % samples];
    let yp = vals[(i + 1) % samples];
    let curv = ym - 2.0 * y0 + yp;
    let mut best = (y0, i as f64 * h);
    if curv < 0.0 {
        let off = 0.5 * (ym - yp) / curv;
        if off.abs() <= 1.0 {
            let s = (i as f64 + off) * h;
            let v = sign * f(s);
            if v > best.0 {
                best = (v, s);
            }
        }
    }
    (sign * best.0, best.1.rem_euclid(TAU))
}

impl RapidOscSpec {
    pub fn new(delta: PeriodicFn, d_delta: PeriodicFn, lambda: PeriodicFn, d_lambda: PeriodicFn, samples: usize) -> Result<Self> {
        if samples < 3 {
            return Err(Error::InvalidInput("need at least three samples".into()));
        }
        let h = TAU / samples as f64;
        if let Some(i) = (0..samples).find(|&i| !(delta(i as f64 * h) > 0.0)) {
            return Err(Error::StandingAssumption(format!("Delta <= 0 at sigma = {}", i as f64 * h)));
        }
        let (min_delta, argmin_delta) = extremum(&|s| delta(s), samples, -1.0);
        if !(min_delta > 0.0) {
            return Err(Error::StandingAssumption(format!("Delta <= 0 at sigma = {argmin_delta}")));
        }
        let ratio = |s: f64| -lambda(s) / delta(s);
        let (e1, _) = extremum(&ratio, samples, -1.0);
        let (e2, _) = extremum(&ratio, samples, 1.0);
        let e = e1.abs().max(e2.abs());
        let (l, _) = extremum(&|s| d_delta(s).abs() * e + d_lambda(s).abs(), samples, 1.0);
        Ok(Self { delta, d_delta, lambda, d_lambda, samples, e1, e2, e, l, min_delta, argmin_delta })
    }

    /// `Δ(σ) = 4 + cos σ`, `Λ(σ) = sin σ`.
    pub fn default_instance() -> Self {
        Self::new(
            Arc::new(|s: f64| 4.0 + s.cos()),
            Arc::new(|s: f64| -s.sin()),
            Arc::new(|s: f64| s.sin()),
            Arc::new(|s: f64| s.cos()),
            RAPID_SAMPLES,
        )
        .expect("4 + cos is positive")
    }

    pub fn constant(delta: f64, lambda: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |_| delta),
            Arc::new(|_| 0.0),
            Arc::new(move |_| lambda),
            Arc::new(|_| 0.0),
            RAPID_SAMPLES,
        )
    }

    pub fn margin(&self, r: u32) -> f64 {
        let r = r as f64;
        self.min_delta - (r + 1.0) / r.sqrt() * self.l.sqrt()
    }
}

/// `min_σ Δ(σ) − ((r+1)/√r)√L`. The worst point carries `Δ` in `a` and `σ` in `z`.
pub fn rapid_osc_condition(spec: &RapidOscSpec, r: u32) -> Result<CheckReport<f64>> {
    if r == 0 {
        return Err(Error::ParameterRange { name: "r".into(), detail: "order starts at 1".into() });
    }
    let p = Point { a: vec![spec.min_delta], z: vec![spec.argmin_delta] };
    Ok(CheckReport::from_margin(Inequality::RapidOsc { r }, spec.margin(r), p, spec.samples))
}

/// Largest `r ≤` [`ORDER_SCAN_CAP`] with a positive margin at every order up to it.
pub fn rapid_osc_max_order(spec: &RapidOscSpec) -> u32 {
    (1..=ORDER_SCAN_CAP).take_while(|&r| spec.margin(r) > 0.0).last().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_case() {
        let s = RapidOscSpec::constant(2.0, 0.5).unwrap();
        assert_eq!(s.l, 0.0);
        assert!((s.e - 0.25).abs() < 1e-15);
        assert_eq!(rapid_osc_max_order(&s), ORDER_SCAN_CAP);
    }

    #[test]
    fn nonpositive_delta_rejected() {
        let r = RapidOscSpec::new(Arc::new(|s: f64| s.cos()), Arc::new(|s: f64| -s.sin()), Arc::new(|_| 0.0), Arc::new(|_| 0.0), 64);
        assert!(matches!(r, Err(Error::StandingAssumption(_))));
    }

    #[test]
    fn default_ratio_extrema() {
        // −sin σ/(4 + cos σ) peaks at cos σ = −1/4 with value 1/√15
        let s = RapidOscSpec::default_instance();
        assert!((s.e2 - 1.0 / 15f64.sqrt()).abs() < 1e-10);
        assert!((s.e1 + 1.0 / 15f64.sqrt()).abs() < 1e-10);
        assert!((s.min_delta - 3.0).abs() < 1e-12);
    }
}
