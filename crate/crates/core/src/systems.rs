//! Built-in systems, each with its domain, rate constants and checkable facts.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypotheses::{check_hyp2, SampleGrid};
use crate::linalg::Matrix;
use crate::manifold::classify_boundary;
use crate::regions::{
    counterexample_fixed_points, delta_for, k_epsilon, persistence_thresholds, q_membership, rapid_osc_condition,
    FixedPointKind, PersistenceConstants, RapidOscSpec, TorusFamilyParams,
};
use crate::types::{BoxDomain, FnField, JacobianBlocks, RateProfile, SplitField, ZBound};

pub const SYSTEM_NAMES: [&str; 5] = ["decoupled_toy", "torus_family", "weak_counterexample", "rapid_osc", "persistence_toy"];

type Component = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

pub type GraphClosure = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type DerivativeClosure = Arc<dyn Fn(&[f64]) -> Matrix<f64> + Send + Sync>;

/// Expectation a system ships with.
#[derive(Clone)]
pub enum Fact {
    /// Closed-form invariant graph and its derivative.
    KnownGraph { h: GraphClosure, dh: DerivativeClosure },
    /// Outcome of the sampled Hyp2 check with a vanishing constant.
    Hyp2Holds(bool),
    /// Whether every a-face is an exit face.
    AllFacesExit(bool),
    /// Equilibria of the underlying planar system.
    FixedPoints { count: usize, kinds: Vec<FixedPointKind> },
    /// Normal-form constants, and whether the configured `ε` lies below `ε*`.
    Persistence { consts: PersistenceConstants, eps: f64, below_threshold: bool },
    /// Rapid-oscillation condition at order `r`.
    RapidOsc { spec: RapidOscSpec, r: u32, certified: bool },
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Fact {
    pub fn label(&self) -> String {
        match self {
            Fact::KnownGraph { .. } => "known_graph".into(),
            Fact::Hyp2Holds(b) => format!("hyp2_holds={b}"),
            Fact::AllFacesExit(b) => format!("all_faces_exit={b}"),
            Fact::FixedPoints { count, .. } => format!("fixed_points={count}"),
            Fact::Persistence { below_threshold, .. } => format!("below_threshold={below_threshold}"),
            Fact::RapidOsc { r, certified, .. } => format!("rapid_osc[r={r}]={certified}"),
        }
    }
}

/// A built system.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: &'static str,
    /// Every parameter, defaults filled in.
    pub params: BTreeMap<String, f64>,
    pub field: Arc<FnField<f64>>,
    pub domain: BoxDomain<f64>,
    pub profile: RateProfile<f64>,
    pub facts: Vec<Fact>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("profile", &self.profile)
            .field("facts", &self.facts)
            .finish()
    }
}

struct Params<'a> {
    given: &'a BTreeMap<String, f64>,
    used: BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn new(given: &'a BTreeMap<String, f64>) -> Self {
        Self { given, used: BTreeMap::new() }
    }

    fn get(&mut self, key: &str, default: f64) -> f64 {
        let v = self.given.get(key).copied().unwrap_or(default);
        self.used.insert(key.to_string(), v);
        v
    }

    fn get_opt(&mut self, key: &str) -> Option<f64> {
        let v = self.given.get(key).copied();
        if let Some(x) = v {
            self.used.insert(key.to_string(), x);
        }
        v
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::ParameterRange { name: key.into(), detail: format!("must be positive, got {v}") });
        }
        Ok(v)
    }

    fn finish(self) -> Result<BTreeMap<String, f64>> {
        if let Some(k) = self.given.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(Error::ParameterRange { name: k.clone(), detail: "unknown parameter".into() });
        }
        Ok(self.used)
    }
}

/// Builds a registered system from a (possibly partial) parameter map.
pub fn build_system(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    match name {
        "decoupled_toy" => decoupled_toy(params),
        "torus_family" => torus_family(params),
        "weak_counterexample" => weak_counterexample(params),
        "rapid_osc" => rapid_osc(params),
        "persistence_toy" => persistence_toy(params),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

fn finish(
    name: &'static str,
    p: Params<'_>,
    field: FnField<f64>,
    domain: BoxDomain<f64>,
    profile: RateProfile<f64>,
    facts: Vec<Fact>,
) -> Result<SystemSpec> {
    let params = p.finish()?;
    if field.n() != domain.n() || field.m() != domain.m() {
        return Err(Error::Shape(format!("{name}: field and domain dimensions differ")));
    }
    Ok(SystemSpec { name, params, field: Arc::new(field), domain, profile, facts })
}

/// `ȧ = 2a − sin z`, `ż = 0` on `(−1, 1) × S¹`; invariant graph `h = sin z / 2`.
fn decoupled_toy(given: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let p = Params::new(given);
    let field = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![2.0 * a[0] - z[0].sin()], |_a: &[f64], _z: &[f64]| vec![0.0])
        .with_jacobian(|_a: &[f64], z: &[f64]| JacobianBlocks {
            aa: Matrix::from_diag(&[2.0]),
            az: Matrix::from_diag(&[-z[0].cos()]),
            za: Matrix::zeros(1, 1),
            zz: Matrix::zeros(1, 1),
        });
    let domain = BoxDomain::new(vec![(-1.0, 1.0)], vec![ZBound::Periodic { period: TAU }])?;
    let profile = RateProfile::pointwise(0.5, 0.5, 0.6, 2)?;
    let facts = vec![
        Fact::KnownGraph {
            h: Arc::new(|z: &[f64]| vec![z[0].sin() / 2.0]),
            dh: Arc::new(|z: &[f64]| Matrix::from_diag(&[z[0].cos() / 2.0])),
        },
        Fact::Hyp2Holds(true),
        Fact::AllFacesExit(true),
    ];
    finish("decoupled_toy", p, field, domain, profile, facts)
}

/// `Ṙ = R(8β − R) + sin kθ₁ + sin kγθ₂`,
/// `θ̇₁ = (β/k)R + (β²/k) sin kθ₁ sin kγθ₂`, `θ̇₂ = ω/(kγ)` on `|R| < δ`.
fn torus_family(given: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut p = Params::new(given);
    let tp = TorusFamilyParams::new(
        p.get("beta", 1.0),
        p.get("omega", 0.5),
        p.get("k", 1.0),
        p.get("gamma", 0.1),
        p.get("delta", 0.3),
    )?;
    let TorusFamilyParams { beta, omega, k, gamma, delta } = tp;
    let kg = k * gamma;
    let field = FnField::new(
        1,
        2,
        move |a: &[f64], z: &[f64]| vec![a[0] * (8.0 * beta - a[0]) + (k * z[0]).sin() + (kg * z[1]).sin()],
        move |a: &[f64], z: &[f64]| {
            vec![beta / k * a[0] + beta * beta / k * (k * z[0]).sin() * (kg * z[1]).sin(), omega / kg]
        },
    )
    .with_jacobian(move |a: &[f64], z: &[f64]| {
        let (s1, c1) = (k * z[0]).sin_cos();
        let (s2, c2) = (kg * z[1]).sin_cos();
        JacobianBlocks {
            aa: Matrix::from_diag(&[8.0 * beta - 2.0 * a[0]]),
            az: Matrix::from_row_major(1, 2, vec![k * c1, kg * c2]),
            za: Matrix::from_row_major(2, 1, vec![beta / k, 0.0]),
            zz: Matrix::from_row_major(2, 2, vec![beta * beta * c1 * s2, beta * beta * gamma * s1 * c2, 0.0, 0.0]),
        }
    });
    let domain = BoxDomain::new(
        vec![(-delta, delta)],
        vec![ZBound::Periodic { period: TAU / k }, ZBound::Periodic { period: TAU / kg }],
    )?;
    // order and constants from the closed-form inequalities, floored for infeasible parameters
    let m1 = q_membership(beta, delta, k, 1)?;
    let mut r = 1;
    while r < 12 && q_membership(beta, delta, k, r + 1)?.member() {
        r += 1;
    }
    let c1 = (0.5 * m1.rates).max(1e-6);
    let cr = if r >= 2 { (0.5 * q_membership(beta, delta, k, r)?.min_slack()).max(1e-6) } else { c1 };
    let profile = RateProfile::pointwise(c1, cr, 0.9, r)?;
    let facts = vec![Fact::Hyp2Holds(m1.rates > 0.0), Fact::AllFacesExit(m1.exit > 0.0)];
    finish("torus_family", p, field, domain, profile, facts)
}

/// The planar system `ẇ = −εw + α² sin θ`, `θ̇ = w` in reversed time, so that
/// `a = w` is the candidate expanding direction: `ȧ = εa − α² sin θ`, `ż = −a`.
fn weak_counterexample(given: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut p = Params::new(given);
    let eps = p.positive("eps", 0.1)?;
    let alpha = p.get("alpha", 0.1);
    let w_max = p.positive("w_max", 1.0)?;
    if !(alpha >= 0.0 && alpha <= eps) {
        return Err(Error::ParameterRange { name: "alpha".into(), detail: "need 0 <= alpha <= eps".into() });
    }
    let a2 = alpha * alpha;
    let field = FnField::new(1, 1, move |a: &[f64], z: &[f64]| vec![eps * a[0] - a2 * z[0].sin()], |a: &[f64], _z: &[f64]| vec![-a[0]])
        .with_jacobian(move |_a: &[f64], z: &[f64]| JacobianBlocks {
            aa: Matrix::from_diag(&[eps]),
            az: Matrix::from_diag(&[-a2 * z[0].cos()]),
            za: Matrix::from_diag(&[-1.0]),
            zz: Matrix::zeros(1, 1),
        });
    let domain = BoxDomain::new(vec![(-w_max, w_max)], vec![ZBound::Periodic { period: TAU }])?;
    let profile = RateProfile::pointwise(0.5 * eps, 0.5 * eps, 0.9, 1)?;
    let fps = counterexample_fixed_points(eps, alpha)?;
    let count = if fps.iter().any(|f| f.kind == FixedPointKind::Degenerate) { usize::MAX } else { fps.len() };
    let facts = vec![
        Fact::Hyp2Holds(false),
        Fact::FixedPoints { count, kinds: fps.iter().map(|f| f.kind).collect() },
    ];
    finish("weak_counterexample", p, field, domain, profile, facts)
}

/// `ρ̇ = Δ(kθ₁)ρ + Λ(kθ₁) + θ₃μ sin θ₂`, `θ̇₁ = ρ/k + θ₃μ cos θ₂ / k`,
/// `θ̇₂ = 1/μ²`, `θ̇₃ = 0`, with `Δ = 4 + cos`, `Λ = sin`.
fn rapid_osc(given: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut p = Params::new(given);
    let spec = RapidOscSpec::default_instance();
    let k = p.positive("k", 1.0 / spec.l.sqrt())?;
    let mu = p.positive("mu", 0.05)?;
    let delta = p.positive("delta", 0.5)?;
    let r = p.get("r", 1.0);
    if r < 1.0 || r.fract() != 0.0 {
        return Err(Error::ParameterRange { name: "r".into(), detail: "must be a positive integer".into() });
    }
    let r = r as u32;
    let (dl, ll) = (spec.delta.clone(), spec.lambda.clone());
    let field = FnField::new(
        1,
        3,
        move |a: &[f64], z: &[f64]| vec![dl(k * z[0]) * a[0] + ll(k * z[0]) + z[2] * mu * z[1].sin()],
        move |a: &[f64], z: &[f64]| vec![a[0] / k + z[2] * mu * z[1].cos() / k, 1.0 / (mu * mu), 0.0],
    );
    let domain = BoxDomain::new(
        vec![(spec.e1 - delta, spec.e2 + delta)],
        vec![
            ZBound::Periodic { period: TAU / k },
            ZBound::Periodic { period: TAU },
            ZBound::Finite { lo: -2.0, hi: 2.0 },
        ],
    )?;
    let report = rapid_osc_condition(&spec, r)?;
    let c = (0.5 * report.margin).max(1e-6);
    let profile = RateProfile::pointwise(c, c, 0.9, r)?;
    let facts = vec![
        Fact::RapidOsc { spec, r, certified: report.passed },
        Fact::Hyp2Holds(report.passed),
        Fact::AllFacesExit(true),
    ];
    finish("rapid_osc", p, field, domain, profile, facts)
}

/// Scalar instance of the weakly hyperbolic normal form, `z = (q̄, ζ, θ̄)`:
///
/// ```text
/// P₁ = Q₁ = a₁pq    Z₁ = a₁(p² + q²) sin ζ
/// P₂ = b sin θ      Q₂ = b cos θ      Z₂ = b sin(ζ − θ)
/// Θ₀ = 1            Θ₁ = b cos ζ      Θ₂ = b sin θ
/// ```
///
/// with `P₀ = σ`, `Q₀ = −σ`, `μ = ν = γ = 1`. On `|p|, |q| ≤ δ` these give
/// `C₁ = C₂ = 2a₁` and `C₃ = C₄ = b`. Setting `reversed = 1` builds the
/// time-reversed system with `a = q` and `z = (p̄, ζ, θ̄)`, `p̄ = p/2`.
fn persistence_toy(given: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut p = Params::new(given);
    let eps = p.positive("eps", 0.2)?;
    let sigma = p.positive("sigma", 1.0)?;
    let a1 = p.positive("a1", 0.5)?;
    let b = p.positive("b", 0.05)?;
    let r = p.get("r", 1.0);
    if r < 1.0 || r.fract() != 0.0 {
        return Err(Error::ParameterRange { name: "r".into(), detail: "must be a positive integer".into() });
    }
    let consts = PersistenceConstants::new(sigma, [2.0 * a1, 2.0 * a1, b, b], 1.0, 1.0, 1.0, r as u32)?;
    let k = match p.get_opt("k") {
        Some(k) if k > 0.0 => k,
        Some(k) => return Err(Error::ParameterRange { name: "k".into(), detail: format!("must be positive, got {k}") }),
        None => k_epsilon(eps, &consts)?,
    };
    let delta = p.positive("delta", 0.05)?;
    let reversed = p.get("reversed", 0.0) != 0.0;
    let e2 = eps * eps;
    let (f, g): (Component, Component) = if !reversed {
        (
            Arc::new(move |a: &[f64], z: &[f64]| {
                let (pp, q, th) = (a[0], 2.0 * z[0], k * z[2]);
                vec![eps * (sigma * pp + a1 * pp * q) + e2 * b * th.sin()]
            }),
            Arc::new(move |a: &[f64], z: &[f64]| {
                let (pp, q, zeta, th) = (a[0], 2.0 * z[0], z[1], k * z[2]);
                vec![
                    eps * (-sigma * z[0] + 0.5 * a1 * pp * q) + 0.5 * e2 * b * th.cos(),
                    eps * (1.0 + a1 * (pp * pp + q * q) * zeta.sin()) + e2 * b * (zeta - th).sin(),
                    (1.0 + eps * b * zeta.cos() + e2 * b * th.sin()) / k,
                ]
            }),
        )
    } else {
        (
            Arc::new(move |a: &[f64], z: &[f64]| {
                let (q, pp, th) = (a[0], 2.0 * z[0], k * z[2]);
                vec![-(eps * (-sigma * q + a1 * pp * q) + e2 * b * th.cos())]
            }),
            Arc::new(move |a: &[f64], z: &[f64]| {
                let (q, pp, zeta, th) = (a[0], 2.0 * z[0], z[1], k * z[2]);
                vec![
                    -(eps * (sigma * z[0] + 0.5 * a1 * pp * q) + 0.5 * e2 * b * th.sin()),
                    -(eps * (1.0 + a1 * (pp * pp + q * q) * zeta.sin()) + e2 * b * (zeta - th).sin()),
                    -(1.0 + eps * b * zeta.cos() + e2 * b * th.sin()) / k,
                ]
            }),
        )
    };
    let field = FnField::new(1, 3, move |a: &[f64], z: &[f64]| f(a, z), move |a: &[f64], z: &[f64]| g(a, z));
    let domain = BoxDomain::new(
        vec![(-delta, delta)],
        vec![
            ZBound::Finite { lo: -0.5 * delta, hi: 0.5 * delta },
            ZBound::Periodic { period: TAU },
            ZBound::Periodic { period: TAU / k },
        ],
    )?;
    let th = persistence_thresholds(&consts, delta.max(1.0))?;
    let below = eps <= th.eps_star && delta_for(eps, &consts) <= delta;
    let profile = RateProfile::pointwise(0.25 * eps * sigma, 0.25 * eps * sigma, 0.9, r as u32)?;
    let facts = vec![
        Fact::Persistence { consts, eps, below_threshold: below },
        Fact::Hyp2Holds(below),
        Fact::AllFacesExit(below),
    ];
    finish("persistence_toy", p, field, domain, profile, facts)
}

/// Result of checking one fact.
#[derive(Clone, Debug, PartialEq)]
pub struct FactOutcome {
    pub fact: String,
    pub passed: bool,
    pub detail: String,
}

/// Checks every fact of `spec` with the library's own audits.
pub fn check_facts(spec: &SystemSpec, density: usize) -> Result<Vec<FactOutcome>> {
    let field = &*spec.field;
    let mut out = Vec::new();
    for fact in &spec.facts {
        let (passed, detail) = match fact {
            Fact::KnownGraph { h, dh } => {
                let grid = SampleGrid::over_z(&spec.domain.z_bounds, density);
                let mut worst: f64 = 0.0;
                for i in 0..grid.len() {
                    let z = grid.point(i);
                    let a = h(&z);
                    // invariance: the field is tangent to the graph, f = Dh·g
                    let lhs = field.f(&a, &z);
                    let rhs = dh(&z).mul_vec(&field.g(&a, &z))?;
                    for (x, y) in lhs.iter().zip(&rhs) {
                        worst = worst.max((x - y).abs());
                    }
                }
                (worst < 1e-10, format!("tangency defect {worst:.3e}"))
            }
            Fact::Hyp2Holds(expect) => {
                let rep = check_hyp2(field, &spec.domain, density, 1e-12)?;
                (rep.passed == *expect, format!("margin {:.6}", rep.margin))
            }
            Fact::AllFacesExit(expect) => {
                let rep = classify_boundary(field, &spec.domain, density)?;
                (rep.all_exit() == *expect, format!("all_exit {}", rep.all_exit()))
            }
            Fact::FixedPoints { count, kinds } => {
                let eps = spec.params["eps"];
                let alpha = spec.params["alpha"];
                let fps = counterexample_fixed_points(eps, alpha)?;
                let got: Vec<FixedPointKind> = fps.iter().map(|f| f.kind).collect();
                let n = if got.contains(&FixedPointKind::Degenerate) { usize::MAX } else { fps.len() };
                (n == *count && got == *kinds, format!("{n} fixed points"))
            }
            Fact::Persistence { consts, eps, below_threshold } => {
                let th = persistence_thresholds(consts, spec.params["delta"].max(1.0))?;
                let below = *eps <= th.eps_star && delta_for(*eps, consts) <= spec.params["delta"];
                (below == *below_threshold, format!("eps_star {:.6}", th.eps_star))
            }
            Fact::RapidOsc { spec: rs, r, certified } => {
                let rep = rapid_osc_condition(rs, *r)?;
                (rep.passed == *certified, format!("margin {:.6}", rep.margin))
            }
        };
        out.push(FactOutcome { fact: fact.label(), passed, detail });
    }
    Ok(out)
}
