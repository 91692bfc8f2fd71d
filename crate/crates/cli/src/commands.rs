//! The subcommands. Each returns a [`CommandOutput`]; hypothesis failures
//! are reported through its status, numeric and configuration problems as errors.

use std::collections::BTreeMap;

use invman_core::flow::variational_final;
use invman_core::hypotheses::{check_hyp2, check_hyp2_profile, check_hyp2star_profile, check_hyp5, Hyp5Options};
use invman_core::manifold::{
    classify_boundary, compute_graph_shoot, compute_graph_transform, cone_invariance_probe, derivative_field,
    intersect_graphs, invariance_residual, lipschitz_audit, periodicity_audit, separation_probe, GraphManifold,
    IntersectOptions, ShootOptions, TransformOptions, ZGrid,
};
use invman_core::regions::{
    beta_projection, best_auxiliary, counterexample_fixed_points, delta_for, k_epsilon, k_objective,
    persistence_thresholds, FixedPointKind,
};
use invman_core::systems::{build_system, check_facts, Fact, SystemSpec};
use invman_core::{hyp1_bound, in_cone, CheckReport, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Method, RunConfig};
use crate::report::{fix, sci, CommandOutput, Status, Table};
use crate::CliError;

fn system(cfg: &RunConfig) -> Result<SystemSpec, CliError> {
    Ok(build_system(cfg.system_name()?, &cfg.params)?)
}

fn join(v: &[f64]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(",")
}

/// Smallest sampled `α − ℓ − ‖D_z f‖ − ‖D_a g‖`.
fn hyp2_slack(spec: &SystemSpec, density: usize) -> Result<f64, CliError> {
    let c = 1e-12;
    Ok(check_hyp2(&*spec.field, &spec.domain, density, c)?.margin + c)
}

fn check_row(t: &mut Table, name: String, rep: &CheckReport<f64>) {
    t.push(vec![
        name,
        sci(rep.margin),
        rep.samples.to_string(),
        Status::from_bool(rep.passed).as_str().into(),
        join(&rep.worst_point.a),
        join(&rep.worst_point.z),
    ]);
}

fn shoot_graph(spec: &SystemSpec, cfg: &RunConfig, margin: f64, default_intervals: usize) -> Result<GraphManifold<f64>, CliError> {
    let intervals = cfg.intervals_for(spec.domain.m(), default_intervals)?;
    let grid = ZGrid::over(&spec.domain, &intervals)?;
    let mut opts = ShootOptions::from_margin(margin)?;
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    Ok(compute_graph_shoot(&*spec.field, &spec.domain, &grid, &opts)?)
}

/// Hyp1 diameter, Hyp2, exit faces, and the higher-order checks when the
/// profile asks for `r ≥ 2`.
pub fn cmd_check(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = system(cfg)?;
    let d = cfg.density();
    let field = &*spec.field;
    let mut t = Table::new(
        format!("check system={}", spec.name),
        &[("inequality", "-"), ("margin", "-"), ("samples", "count"), ("status", "-"), ("worst_a", "-"), ("worst_z", "-")],
    );
    let diam = hyp1_bound(&spec.domain)?;
    t.push(vec!["hyp1_diameter".into(), sci(diam), "1".into(), "pass".into(), "-".into(), "-".into()]);

    let hyp2 = check_hyp2_profile(field, &spec.domain, d, &spec.profile)?;
    check_row(&mut t, hyp2.inequality.to_string(), &hyp2);

    let boundary = classify_boundary(field, &spec.domain, d)?;
    for f in &boundary.faces {
        t.push(vec![
            format!("face[{}]={}", f.face, f.class),
            sci(f.min_speed),
            f.samples.to_string(),
            Status::from_bool(f.class == invman_core::manifold::FaceClass::Exit).as_str().into(),
            join(&f.worst_point.a),
            join(&f.worst_point.z),
        ]);
    }

    let r = spec.profile.r;
    if r >= 2 {
        let star = check_hyp2star_profile(field, &spec.domain, d, &spec.profile)?;
        check_row(&mut t, star.inequality.to_string(), &star);
        if spec.domain.n() == 1 && hyp2.passed {
            let graph = shoot_graph(&spec, cfg, hyp2_slack(&spec, d)?, 16)?;
            match check_hyp5(field, &graph, Some(spec.profile.eta), r, spec.profile.cr, d, &Hyp5Options::default()) {
                Ok(rep) => check_row(&mut t, rep.inequality.to_string(), &rep),
                Err(invman_core::Error::Precondition(msg)) => t.push(vec![
                    format!("hyp5[r={r}]"),
                    "nan".into(),
                    "0".into(),
                    "fail".into(),
                    msg.replace(' ', "_"),
                    "-".into(),
                ]),
                Err(e) => return Err(e.into()),
            }
        }
    }

    let failed = t.rows.iter().filter(|row| row[3] == "fail").count();
    let mut out = CommandOutput::new("check");
    out.status = Status::from_bool(failed == 0);
    out.add("system", spec.name);
    out.add("margin", sci(hyp2.margin));
    out.add("checks", t.rows.len());
    out.add("failed", failed);
    out.tables.push(t);
    Ok(out)
}

/// β-projections of the feasible sets for the requested orders.
pub fn cmd_region(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let orders = cfg.orders.clone().unwrap_or_else(|| (1..=8).collect());
    let res = cfg.resolution.unwrap_or(1e-3);
    let rows: Vec<_> = orders.par_iter().map(|&r| beta_projection(r, res)).collect::<Result<_, _>>()?;
    let mut t = Table::new(
        format!("region resolution={res:e}"),
        &[("r", "-"), ("beta_lo", "-"), ("beta_hi", "-"), ("best_slack", "-"), ("empty", "-")],
    );
    for iv in &rows {
        let (lo, hi) = iv.bounds.map_or(("nan".to_string(), "nan".to_string()), |(a, b)| (fix(a), fix(b)));
        t.push(vec![iv.r.to_string(), lo, hi, sci(iv.best_slack), iv.is_empty().to_string()]);
    }
    let mut out = CommandOutput::new("region");
    out.add("rows", rows.len());
    out.add("nonempty", rows.iter().filter(|i| !i.is_empty()).count());
    out.add("margin", sci(rows.iter().map(|i| i.best_slack).fold(f64::NEG_INFINITY, f64::max)));
    out.tables.push(t);
    Ok(out)
}

/// Invariant graph plus its audits. The graph table is the payload.
pub fn cmd_manifold(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = system(cfg)?;
    let d = cfg.density();
    let field = &*spec.field;
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut out = CommandOutput::new("manifold");
    out.add("system", spec.name);
    let margin = hyp2_slack(&spec, d)?;
    out.add("hyp2_slack", sci(margin));
    if !(margin > 0.0) {
        out.status = Status::Fail;
        return Ok(out);
    }
    let method = cfg.method.unwrap_or(if spec.domain.n() == 1 { Method::Shoot } else { Method::Transform });
    let graph = match method {
        Method::Shoot => shoot_graph(&spec, cfg, margin, 32)?,
        Method::Transform => {
            let intervals = cfg.intervals_for(spec.domain.m(), 32)?;
            let grid = ZGrid::over(&spec.domain, &intervals)?;
            let mut opts = TransformOptions::from_margin(margin)?;
            opts.tol = tol.max(1e-12);
            compute_graph_transform(field, &spec.domain, &grid, &opts)?.graph
        }
    };

    let mut t = Table::new(
        format!("manifold system={} method={method:?} nodes={}", spec.name, graph.grid.node_count()).to_lowercase(),
        &[("property", "-"), ("value", "-"), ("threshold", "-"), ("status", "-")],
    );
    let prop = |t: &mut Table, name: &str, value: f64, threshold: f64, ok: bool| {
        t.push(vec![name.into(), sci(value), sci(threshold), Status::from_bool(ok).as_str().into()]);
    };

    let graph = match derivative_field(field, &graph, 12.0 / margin, tol) {
        Ok(g) => g,
        Err(e) => {
            t.push(vec!["riccati_dh".into(), "nan".into(), "-".into(), format!("skipped:{e}").replace(' ', "_")]);
            graph
        }
    };
    prop(&mut t, "unresolved_nodes", graph.unresolved.len() as f64, 0.0, graph.unresolved.is_empty());
    let t_probe = cfg.t_probe.unwrap_or(1.0);
    let inv = invariance_residual(field, &graph, t_probe, graph.grid.node_count().min(64), tol)?;
    prop(&mut t, "invariance_residual", inv.max_residual, 1e-3, inv.max_residual < 1e-3);
    let lip = lipschitz_audit(&graph, cfg.pairs.unwrap_or(1000))?;
    prop(&mut t, "lipschitz_margin", lip.margin, 0.0, lip.passed);
    let per = periodicity_audit(&graph, &spec.domain.periods(), 1e-4)?;
    prop(&mut t, "periodicity_deviation", 1e-4 - per.margin, 1e-4, per.passed);

    let mut h_err = None;
    for fact in &spec.facts {
        if let Fact::KnownGraph { h, dh } = fact {
            let mut eh: f64 = 0.0;
            let mut edh: f64 = 0.0;
            for i in 0..graph.grid.node_count() {
                let z = graph.grid.node(i);
                for (u, v) in graph.h_values[i].iter().zip(h(&z)) {
                    eh = eh.max((u - v).abs());
                }
                if let Some(dv) = &graph.dh_values {
                    let exact = dh(&z);
                    for (u, v) in dv[i].as_slice().iter().zip(exact.as_slice()) {
                        edh = edh.max((u - v).abs());
                    }
                } else {
                    edh = f64::NAN;
                }
            }
            prop(&mut t, "known_h_error", eh, 1e-5, eh < 1e-5);
            prop(&mut t, "known_dh_error", edh, 1e-5, edh < 1e-5);
            h_err = Some((eh, edh));
        }
    }

    out.status = Status::from_bool(t.rows.iter().all(|r| r[3] != "fail"));
    out.add("residual", sci(inv.max_residual));
    out.add("lipschitz_margin", sci(lip.margin));
    out.add("periodicity_margin", sci(per.margin));
    if let Some((eh, edh)) = h_err {
        out.add("h_error", sci(eh));
        out.add("dh_error", sci(edh));
    }
    out.payload = Some(graph.to_table());
    out.tables.push(t);
    Ok(out)
}

fn random_point(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Point<f64> {
    let a = spec.domain.a_bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen_range(0.25..0.75)).collect();
    let z = spec
        .domain
        .z_bounds
        .iter()
        .map(|b| {
            let (lo, hi, _) = b.sample_range();
            lo + (hi - lo) * rng.gen_range(0.1..0.9)
        })
        .collect();
    Point { a, z }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// A pair `(x₁, x₂)` with `x₂` strictly inside the cone at `x₁`.
fn cone_pair(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> (Point<f64>, Point<f64>) {
    let x1 = random_point(spec, rng);
    let width = spec.domain.a_bounds.iter().map(|&(lo, hi)| hi - lo).fold(0.0, f64::max);
    let s = 1e-2 * width;
    let da = random_unit(rng, x1.n());
    let dz = random_unit(rng, x1.m());
    let shrink = rng.gen_range(0.0..0.9);
    let x2 = Point {
        a: x1.a.iter().zip(&da).map(|(a, d)| a + s * d).collect(),
        z: x1.z.iter().zip(&dz).map(|(z, d)| z + shrink * s * d).collect(),
    };
    (x1, x2)
}

/// Cone invariance, separation, cocycle and Riccati-vs-FD probes, plus the
/// system's own facts.
pub fn cmd_audit(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = system(cfg)?;
    let d = cfg.density();
    let field = &*spec.field;
    let tol = cfg.tol.unwrap_or(1e-9);
    let pairs = cfg.pairs.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut t = Table::new(
        format!("audit system={}", spec.name),
        &[("property", "-"), ("checked", "count"), ("failures", "count"), ("worst", "-"), ("status", "-")],
    );
    let row = |t: &mut Table, name: &str, checked: usize, failures: usize, worst: String, status: &str| {
        t.push(vec![name.into(), checked.to_string(), failures.to_string(), worst, status.into()]);
    };

    let margin = hyp2_slack(&spec, d)?;
    let certified = margin > 0.0;
    // long enough to see the expansion, short enough to stay in the domain
    let t_end = cfg.t_probe.unwrap_or(if certified { (2.0 / margin).min(1.0) } else { 1.0 });
    if certified {
        let samples: Vec<_> = (0..pairs).map(|_| cone_pair(&spec, &mut rng)).collect();
        for (x1, x2) in &samples {
            debug_assert!(in_cone(x1, x2).unwrap_or(false));
        }
        let steps = 40;
        let results: Vec<(bool, Option<f64>, f64)> = samples
            .par_iter()
            .map(|(x1, x2)| {
                let cone = cone_invariance_probe(field, x1, x2, t_end, steps, Some(&spec.domain), tol)?;
                // pairs that leave before the first checkpoint have nothing to separate
                let sep = match separation_probe(field, x1, x2, t_end, 0.5 * margin, steps, Some(&spec.domain), tol) {
                    Ok(rep) => Some(rep.margin),
                    Err(invman_core::Error::EmptyDomain(_)) => None,
                    Err(e) => return Err(e),
                };
                let min_gauge = cone.gauges.iter().cloned().fold(f64::INFINITY, f64::min);
                Ok((cone.holds, sep, min_gauge))
            })
            .collect::<Result<_, invman_core::Error>>()?;
        let cone_fail = results.iter().filter(|r| !r.0).count();
        let worst = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        row(&mut t, "cone_invariance", pairs, cone_fail, sci(worst), Status::from_bool(cone_fail == 0).as_str());
        let seps: Vec<f64> = results.iter().filter_map(|r| r.1).collect();
        let sep_fail = seps.iter().filter(|&&m| !(m > 0.0)).count();
        let worst = seps.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = sep_fail == 0 && !seps.is_empty();
        row(&mut t, "separation", seps.len(), sep_fail, sci(worst), Status::from_bool(ok).as_str());
    } else {
        row(&mut t, "cone_invariance", 0, 0, sci(margin), "skipped");
        row(&mut t, "separation", 0, 0, sci(margin), "skipped");
    }

    // cocycle on short random splits
    let splits = 10;
    let span = t_end.min(0.25);
    let mut worst: f64 = 0.0;
    for _ in 0..splits {
        let x = random_point(&spec, &mut rng);
        let (s, u) = (rng.gen_range(0.0..span), rng.gen_range(0.0..span));
        let (_, direct) = variational_final(field, &x, s + u, tol)?;
        let (xs, qs) = variational_final(field, &x, s, tol)?;
        let (_, qu) = variational_final(field, &xs, u, tol)?;
        let composed = qu.matmul(&qs)?;
        let res = (&direct - &composed).frobenius_norm() / direct.frobenius_norm().max(1.0);
        worst = worst.max(res);
    }
    let ok = worst < 100.0 * tol;
    row(&mut t, "cocycle", splits, usize::from(!ok), sci(worst), Status::from_bool(ok).as_str());

    if certified && spec.domain.n() == 1 && spec.domain.m() <= 2 {
        let graph = shoot_graph(&spec, cfg, margin, 16)?;
        let dgraph = derivative_field(field, &graph, 12.0 / margin, 1e-10)?;
        let dh = dgraph.dh_values.as_ref().expect("derivative field stores Dh");
        let mut worst: f64 = 0.0;
        for (i, m) in dh.iter().enumerate() {
            let fd = graph.eval_jacobian_fd(&graph.grid.node(i))?;
            for (u, v) in m.as_slice().iter().zip(fd.as_slice()) {
                worst = worst.max((u - v).abs());
            }
        }
        // the interpolant is only third-order accurate in its derivative
        let ok = worst < 1e-2;
        row(&mut t, "riccati_vs_fd", dh.len(), usize::from(!ok), sci(worst), Status::from_bool(ok).as_str());
    } else {
        row(&mut t, "riccati_vs_fd", 0, 0, "-".into(), "skipped");
    }

    for f in check_facts(&spec, d)? {
        let name = format!("fact:{}", f.fact);
        row(&mut t, &name, 1, usize::from(!f.passed), f.detail.replace(' ', "_"), Status::from_bool(f.passed).as_str());
    }

    let failed = t.rows.iter().filter(|r| r[4] == "fail").count();
    let mut out = CommandOutput::new("audit");
    out.status = Status::from_bool(failed == 0);
    out.add("system", spec.name);
    out.add("certified", certified);
    out.add("margin", sci(margin));
    out.add("properties", t.rows.len());
    out.add("failed", failed);
    out.tables.push(t);
    Ok(out)
}

fn only_params<'a>(cfg: &'a RunConfig, allowed: &[&str]) -> Result<&'a BTreeMap<String, f64>, CliError> {
    if let Some(k) = cfg.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown parameter `{k}`")));
    }
    Ok(&cfg.params)
}

/// Equilibria of the planar counterexample.
pub fn cmd_counterexample(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let p = only_params(cfg, &["eps", "alpha"])?;
    let eps = p.get("eps").copied().unwrap_or(0.1);
    let alpha = p.get("alpha").copied().unwrap_or(eps);
    let fps = counterexample_fixed_points(eps, alpha)?;
    let mut t = Table::new(
        format!("counterexample eps={eps} alpha={alpha}"),
        &[
            ("w", "-"),
            ("theta", "rad"),
            ("lambda1_re", "1/time"),
            ("lambda1_im", "1/time"),
            ("lambda2_re", "1/time"),
            ("lambda2_im", "1/time"),
            ("kind", "-"),
        ],
    );
    for f in &fps {
        let [l1, l2] = f.eigenvalues;
        t.push(vec![fix(f.w), fix(f.theta), sci(l1.re), sci(l1.im), sci(l2.re), sci(l2.im), f.kind.to_string()]);
    }
    let degenerate = fps.iter().any(|f| f.kind == FixedPointKind::Degenerate);
    let mut out = CommandOutput::new("counterexample");
    out.status = Status::from_bool(!degenerate);
    out.add("fixed_points", if degenerate { "continuum".to_string() } else { fps.len().to_string() });
    out.tables.push(t);
    Ok(out)
}

/// Per-node outcome of the forward/backward graph intersection.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeIntersection {
    pub zeta: f64,
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub iterations: usize,
    pub max_ratio: f64,
    pub lipschitz_margin: f64,
}

/// Computes `p = 𝒫(q, ζ, θ)` and `q = 𝒬(p, ζ, θ)` for `persistence_toy` by
/// shooting and intersects them at every `(ζ, θ̄)` node.
pub fn intersect_persistence(cfg: &RunConfig) -> Result<Vec<NodeIntersection>, CliError> {
    let fwd = build_system("persistence_toy", &cfg.params)?;
    let mut rp = cfg.params.clone();
    rp.insert("reversed".into(), 1.0);
    let rev = build_system("persistence_toy", &rp)?;
    let d = cfg.density().min(9);
    let margin = hyp2_slack(&fwd, d)?.min(hyp2_slack(&rev, d)?);
    if !(margin > 0.0) {
        return Err(CliError::Hypothesis(format!("sampled Hyp2 slack {margin:.3e} is not positive")));
    }
    let intervals = cfg.intervals_for(3, 8)?;
    let gp = shoot_graph(&fwd, cfg, margin, 8)?;
    let gq = shoot_graph(&rev, cfg, margin, 8)?;
    if !gp.unresolved.is_empty() || !gq.unresolved.is_empty() {
        return Err(CliError::Numeric("shooting left unresolved nodes".into()));
    }
    let delta = fwd.params["delta"];
    let zgrid = ZGrid::over(&fwd.domain, &intervals)?;
    let (zeta_ax, theta_ax) = (&zgrid.axes[1], &zgrid.axes[2]);
    let nodes: Vec<(f64, f64)> = (0..zeta_ax.len())
        .flat_map(|i| (0..theta_ax.len()).map(move |j| (i, j)))
        .map(|(i, j)| (zeta_ax.node(i), theta_ax.node(j)))
        .collect();
    let opts = IntersectOptions { max_iter: 200, tol: 1e-13, q_box: vec![(-delta, delta)], p_box: vec![(-delta, delta)], audit_pairs: 200 };
    nodes
        .par_iter()
        .map(|&(zeta, theta)| {
            let p_of_q = |q: &[f64]| gp.eval(&[0.5 * q[0], zeta, theta]);
            let q_of_p = |p: &[f64]| gq.eval(&[0.5 * p[0], zeta, theta]);
            let r = intersect_graphs(&p_of_q, &q_of_p, &[0.0], &[0.0], &opts)?;
            Ok(NodeIntersection {
                zeta,
                theta,
                p: r.p[0],
                q: r.q[0],
                iterations: r.iterations,
                max_ratio: r.ratios.iter().cloned().fold(0.0, f64::max),
                lipschitz_margin: r.lipschitz.margin,
            })
        })
        .collect::<Result<_, invman_core::Error>>()
        .map_err(CliError::from)
}

/// `ε*`, `δ*` and the `k_ε` curve for the persistence constants.
pub fn cmd_persist(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    if cfg.system.as_deref().is_some_and(|s| s != "persistence_toy") {
        return Err(CliError::Config("persist works on persistence_toy".into()));
    }
    let spec = build_system("persistence_toy", &cfg.params)?;
    let (consts, eps) = spec
        .facts
        .iter()
        .find_map(|f| match f {
            Fact::Persistence { consts, eps, .. } => Some((*consts, *eps)),
            _ => None,
        })
        .expect("persistence_toy carries its constants");
    let delta = spec.params["delta"];
    let th = persistence_thresholds(&consts, delta.max(1.0))?;
    let mut curve = Table::new(
        format!("persist k_eps curve sigma={} c={:?} r={}", consts.sigma, [consts.c1, consts.c2, consts.c3, consts.c4], consts.r),
        &[("eps", "-"), ("k_eps", "-"), ("objective", "-"), ("delta", "-")],
    );
    let top = th.eps_star;
    let steps = 40;
    for i in 0..=steps {
        let e = top * 10f64.powf(-3.0 * (1.0 - i as f64 / steps as f64));
        let k = k_epsilon(e, &consts)?;
        curve.push(vec![sci(e), sci(k), sci(k_objective(e, k, &consts)), sci(delta_for(e, &consts))]);
    }
    let mut out = CommandOutput::new("persist");
    out.status = Status::from_bool(th.eps_star > 0.0);
    out.add("eps_star", sci(th.eps_star));
    out.add("delta_star", sci(th.delta_star));
    out.add("k_star", sci(th.k_star));
    out.add("at_ceiling", th.at_ceiling);
    out.add("eps", sci(eps));
    out.add("below_threshold", eps <= th.eps_star);
    out.tables.push(curve);

    if cfg.intersect.unwrap_or(false) {
        let nodes = intersect_persistence(cfg)?;
        let mut t = Table::new(
            "persist intersection",
            &[("zeta", "rad"), ("theta_bar", "-"), ("p", "-"), ("q", "-"), ("iterations", "count"), ("max_ratio", "-")],
        );
        for n in &nodes {
            t.push(vec![fix(n.zeta), fix(n.theta), sci(n.p), sci(n.q), n.iterations.to_string(), sci(n.max_ratio)]);
        }
        let worst = nodes.iter().map(|n| n.max_ratio).fold(0.0, f64::max);
        out.add("max_ratio", sci(worst));
        if worst > 0.5 {
            out.status = Status::Fail;
        }
        out.tables.push(t);
    }
    Ok(out)
}

/// Existence and certified order over a β sweep, repeated per ω.
pub fn cmd_plotdata(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (lo, hi) = cfg.beta_range.unwrap_or((0.2, 8.0));
    let steps = cfg.beta_steps.unwrap_or(40).max(2);
    let omegas = cfg.omegas.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
    let betas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    // the rate inequalities do not involve ω
    let orders: Vec<(u32, f64)> = betas
        .par_iter()
        .map(|&b| {
            let mut order = 0;
            let mut slack = best_auxiliary(b, 1)?.2;
            for r in 1..=8 {
                let s = best_auxiliary(b, r)?.2;
                if s > 0.0 {
                    order = r;
                    slack = s;
                } else {
                    break;
                }
            }
            Ok((order, slack))
        })
        .collect::<Result<_, invman_core::Error>>()?;
    let mut t = Table::new(
        "plotdata torus_family",
        &[("beta", "-"), ("omega", "-"), ("exists", "-"), ("order", "-"), ("slack", "-")],
    );
    for &w in &omegas {
        for (b, &(order, slack)) in betas.iter().zip(&orders) {
            t.push(vec![fix(*b), fix(w), (order > 0).to_string(), order.to_string(), sci(slack)]);
        }
    }
    let mut out = CommandOutput::new("plotdata");
    out.add("rows", t.rows.len());
    out.add("max_order", orders.iter().map(|o| o.0).max().unwrap_or(0));
    out.tables.push(t);
    Ok(out)
}
