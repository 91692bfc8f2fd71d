//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use invman_cli::{cmd_audit, cmd_counterexample, cmd_manifold, cmd_region, intersect_persistence, Command, Method, RunConfig};
use invman_core::flow::{kron, variational_final, vec};
use invman_core::hypotheses::check_hyp2;
use invman_core::manifold::GraphManifold;
use invman_core::regions::{
    k_epsilon, persistence_thresholds, rapid_osc_condition, rapid_osc_max_order, PersistenceConstants, RapidOscSpec,
};
use invman_core::systems::{build_system, SYSTEM_NAMES};
use invman_core::{Matrix, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn config(cmd: Command, system: &str, params: &[(&str, f64)]) -> RunConfig {
    RunConfig {
        command: Some(cmd),
        system: Some(system.into()),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        ..Default::default()
    }
}

const REFERENCE_TABLE: [(f64, f64); 7] = [
    (0.395, 7.248),
    (0.404, 3.887),
    (0.420, 2.542),
    (0.441, 1.849),
    (0.472, 1.412),
    (0.518, 1.093),
    (0.634, 0.781),
];

fn region_rows() -> Result<Vec<Option<(f64, f64)>>, String> {
    let cfg = RunConfig { command: Some(Command::Region), resolution: Some(1e-3), ..Default::default() };
    let out = cmd_region(&cfg).map_err(|e| e.to_string())?;
    let t = out.table("region").ok_or("no region table")?;
    Ok((0..t.rows.len())
        .map(|i| {
            let lo: f64 = t.get(i, "beta_lo").unwrap().parse().unwrap();
            let hi: f64 = t.get(i, "beta_hi").unwrap().parse().unwrap();
            (!lo.is_nan()).then_some((lo, hi))
        })
        .collect())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rows = region_rows()?;
    let secs = start.elapsed().as_secs_f64();
    ensure(rows.len() == 8, "expected eight rows")?;
    let mut worst: f64 = 0.0;
    for (r, (row, &(lo, hi))) in rows.iter().zip(&REFERENCE_TABLE).enumerate() {
        let (a, b) = row.ok_or(format!("r={} is empty", r + 1))?;
        worst = worst.max((a - lo).abs()).max((b - hi).abs());
    }
    ensure(worst <= 0.005, format!("endpoint deviation {worst:.4}"))?;
    ensure(rows[7].is_none(), "r=8 is not empty")?;
    ensure(secs < 300.0, format!("took {secs:.1}s"))?;
    Ok(format!("max endpoint deviation {worst:.4}, r=8 empty, {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let rows = region_rows()?;
    let b: Vec<(f64, f64)> = rows[..7].iter().map(|r| r.ok_or("empty row")).collect::<Result<_, _>>()?;
    for (i, w) in b.windows(2).enumerate() {
        ensure(w[1].0 > w[0].0 && w[1].1 < w[0].1, format!("r={} not strictly inside r={}", i + 2, i + 1))?;
    }
    Ok("seven intervals strictly nested".into())
}

fn roots(eps: f64, alpha: f64, sign: f64) -> [(f64, f64); 2] {
    // λ² + ελ + sign·α² = 0
    let disc = eps * eps - 4.0 * sign * alpha * alpha;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [((-eps - s) / 2.0, 0.0), ((-eps + s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(-eps / 2.0, -s / 2.0), (-eps / 2.0, s / 2.0)]
    }
}

fn sorted_eigs(t: &invman_cli::Table, row: usize) -> [(f64, f64); 2] {
    let g = |c: &str| -> f64 { t.get(row, c).unwrap().parse().unwrap() };
    let mut v = [(g("lambda1_re"), g("lambda1_im")), (g("lambda2_re"), g("lambda2_im"))];
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn criterion_3() -> Outcome {
    let (eps, alpha) = (0.1, 0.1);
    let out = cmd_counterexample(&RunConfig {
        command: Some(Command::Counterexample),
        params: [("eps".to_string(), eps), ("alpha".to_string(), alpha)].into_iter().collect(),
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let t = out.table("counterexample").ok_or("no table")?;
    ensure(t.rows.len() == 2, format!("{} fixed points", t.rows.len()))?;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let theta: f64 = t.get(i, "theta").unwrap().parse().unwrap();
        let saddle_point = theta.abs() < 1e-6;
        let kind = t.get(i, "kind").unwrap();
        let got = sorted_eigs(t, i);
        let exact = roots(eps, alpha, if saddle_point { -1.0 } else { 1.0 });
        for (g, e) in got.iter().zip(&exact) {
            worst = worst.max((g.0 - e.0).abs()).max((g.1 - e.1).abs());
        }
        if saddle_point {
            ensure(kind == "saddle" && got[0].0 < 0.0 && got[1].0 > 0.0, "(0,0) is not a saddle")?;
        } else {
            ensure((theta - TAU / 2.0).abs() < 1e-6, "second point not at pi")?;
            ensure(kind == "stable_spiral" && got[0].1 != 0.0 && got[0].0 < 0.0, "(0,pi) is not a stable spiral")?;
        }
    }
    ensure(worst < 1e-10, format!("eigenvalue error {worst:e}"))?;
    let below = cmd_counterexample(&RunConfig {
        command: Some(Command::Counterexample),
        params: [("eps".to_string(), eps), ("alpha".to_string(), 0.04)].into_iter().collect(),
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let t2 = below.table("counterexample").unwrap();
    ensure((0..2).any(|i| t2.get(i, "kind") == Some("stable_node")), "no stable node for alpha < eps/2")?;
    Ok(format!("saddle + stable spiral, eigenvalue error {worst:.1e}; node at alpha=0.04"))
}

fn criterion_4() -> Outcome {
    let out = cmd_manifold(&config(Command::Manifold, "decoupled_toy", &[])).map_err(|e| e.to_string())?;
    let g = GraphManifold::<f64>::from_table(out.payload.as_deref().ok_or("no graph payload")?).map_err(|e| e.to_string())?;
    let dh = g.dh_values.as_ref().ok_or("graph has no Dh column")?;
    let (mut eh, mut edh): (f64, f64) = (0.0, 0.0);
    for i in 0..g.grid.node_count() {
        let z = g.grid.node(i)[0];
        eh = eh.max((g.h_values[i][0] - z.sin() / 2.0).abs());
        edh = edh.max((dh[i][(0, 0)] - z.cos() / 2.0).abs());
    }
    let lip: f64 = out.summary_value("lipschitz_margin").ok_or("no Lipschitz margin")?.parse().unwrap();
    ensure(eh < 1e-5, format!("h error {eh:e}"))?;
    ensure(edh < 1e-5, format!("Dh error {edh:e}"))?;
    ensure(lip >= 0.49, format!("Lipschitz margin {lip}"))?;
    Ok(format!("h error {eh:.1e}, Dh error {edh:.1e}, Lipschitz margin {lip:.3}"))
}

fn criterion_5() -> Outcome {
    let params = [("beta", 1.0), ("omega", 0.5)];
    let spec = build_system("torus_family", &config(Command::Check, "torus_family", &params).params).map_err(|e| e.to_string())?;
    let hyp2 = check_hyp2(&*spec.field, &spec.domain, 33, spec.profile.c1).map_err(|e| e.to_string())?;
    ensure(hyp2.passed, format!("Hyp2 fails, margin {}", hyp2.margin))?;
    let run = |method| -> Result<invman_cli::CommandOutput, String> {
        let mut cfg = config(Command::Manifold, "torus_family", &params);
        cfg.intervals = Some(vec![16, 32]);
        cfg.method = Some(method);
        cfg.t_probe = Some(1.0);
        cmd_manifold(&cfg).map_err(|e| e.to_string())
    };
    let shoot = run(Method::Shoot)?;
    let transform = run(Method::Transform)?;
    let num = |o: &invman_cli::CommandOutput, k: &str| -> f64 { o.summary_value(k).unwrap().parse().unwrap() };
    let residual = num(&shoot, "residual");
    let lip = num(&shoot, "lipschitz_margin");
    let per_dev = 1e-4 - num(&shoot, "periodicity_margin");
    ensure(residual < 1e-3, format!("invariance residual {residual:e}"))?;
    ensure(lip > 0.0, format!("Lipschitz margin {lip}"))?;
    ensure(per_dev < 1e-4, format!("periodicity deviation {per_dev:e}"))?;
    let gs = GraphManifold::<f64>::from_table(shoot.payload.as_deref().unwrap()).map_err(|e| e.to_string())?;
    let gt = GraphManifold::<f64>::from_table(transform.payload.as_deref().unwrap()).map_err(|e| e.to_string())?;
    let diff = gs.h_values.iter().zip(&gt.h_values).map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max);
    ensure(diff < 1e-4, format!("shoot vs transform {diff:e}"))?;
    Ok(format!(
        "Hyp2 margin {:.3}, residual {residual:.1e}, Lipschitz margin {lip:.3}, periodicity {per_dev:.1e}, methods differ by {diff:.1e}",
        hyp2.margin
    ))
}

fn criterion_6() -> Outcome {
    let mut certified = Vec::new();
    for name in SYSTEM_NAMES {
        let spec = build_system(name, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let rep = check_hyp2(&*spec.field, &spec.domain, 17, 1e-12).map_err(|e| e.to_string())?;
        if !rep.passed {
            continue;
        }
        let mut cfg = config(Command::Audit, name, &[]);
        cfg.pairs = Some(100);
        let out = cmd_audit(&cfg).map_err(|e| e.to_string())?;
        let t = out.table("audit").unwrap();
        for prop in ["cone_invariance", "separation"] {
            let i = (0..t.rows.len()).find(|&i| t.get(i, "property") == Some(prop)).ok_or("missing property")?;
            let checked = t.get(i, "checked").unwrap();
            let failures = t.get(i, "failures").unwrap();
            ensure(checked == "100" && failures == "0", format!("{name} {prop}: {failures} of {checked} failed"))?;
        }
        certified.push(name);
    }
    ensure(!certified.is_empty(), "no certified system")?;
    Ok(format!("100 pairs, zero failures on {}", certified.join(", ")))
}

fn criterion_7() -> Outcome {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for name in SYSTEM_NAMES {
        let spec = build_system(name, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let span = match name {
            "rapid_osc" => 0.2,
            "torus_family" => 0.25,
            _ => 2.0,
        };
        for _ in 0..4 {
            let a = spec.domain.a_bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen_range(0.3..0.7)).collect();
            let z = spec
                .domain
                .z_bounds
                .iter()
                .map(|b| {
                    let (lo, hi, _) = b.sample_range();
                    lo + (hi - lo) * rng.gen_range(0.0..1.0)
                })
                .collect();
            let x = Point { a, z };
            let (t, tau) = (rng.gen_range(0.0..span), rng.gen_range(0.0..span));
            let f = &*spec.field;
            let err = |e: invman_core::Error| e.to_string();
            let (_, direct) = variational_final(f, &x, t + tau, tol).map_err(err)?;
            let (xt, qt) = variational_final(f, &x, t, tol).map_err(err)?;
            let (_, qtau) = variational_final(f, &xt, tau, tol).map_err(err)?;
            let res = (&direct - &qtau.matmul(&qt).map_err(err)?).frobenius_norm() / direct.frobenius_norm().max(1.0);
            worst = worst.max(res);
        }
    }
    ensure(worst < 100.0 * tol, format!("cocycle residual {worst:e}"))?;

    let mut vec_worst: f64 = 0.0;
    for _ in 0..1000 {
        let d: Vec<usize> = (0..4).map(|_| rng.gen_range(1..5)).collect();
        let mut m = |r, c| Matrix::<f64>::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
        let (a, p, b) = (m(d[0], d[1]), m(d[1], d[2]), m(d[2], d[3]));
        let lhs = vec(&a.matmul(&p).unwrap().matmul(&b).unwrap());
        let rhs = kron(&b.transpose(), &a).mul_vec(&vec(&p)).unwrap();
        let scale = lhs.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (u, v) in lhs.iter().zip(&rhs) {
            vec_worst = vec_worst.max((u - v).abs() / (scale * f64::EPSILON));
        }
    }
    ensure(vec_worst <= 64.0, format!("vec identity off by {vec_worst:.1} ulps"))?;
    Ok(format!("cocycle residual {worst:.1e} < {:.0e}; vec identity within {vec_worst:.0} eps", 100.0 * tol))
}

/// The `k`-dependent terms written out from the constants directly.
fn objective(eps: f64, k: f64, c: &PersistenceConstants) -> f64 {
    let r = c.r as f64;
    let k5 = (1.5 * r + 1.0) * c.c4;
    let k6 = (4.0 * r + 1.0) * c.c4;
    let k7 = k6;
    k * eps.powf(c.mu) * k5 + (eps.powf(c.nu - 1.0) * k6 + eps.powf(c.gamma_exp) * k7) / k
}

fn criterion_8() -> Outcome {
    let toy = build_system("persistence_toy", &BTreeMap::new()).map_err(|e| e.to_string())?;
    let consts = toy
        .facts
        .iter()
        .find_map(|f| match f {
            invman_core::systems::Fact::Persistence { consts, .. } => Some(*consts),
            _ => None,
        })
        .ok_or("persistence_toy has no constants")?;
    let cases = [
        (consts, 0.2),
        (PersistenceConstants::new(0.5, [0.3, 0.2, 0.1, 0.4], 0.7, 0.6, 1.3, 3).map_err(|e| e.to_string())?, 0.01),
    ];
    let mut worst: f64 = 0.0;
    for (c, eps) in cases {
        let k = k_epsilon(eps, &c).map_err(|e| e.to_string())?;
        let grid_min = (0..1000)
            .map(|i| objective(eps, 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0), &c))
            .fold(f64::INFINITY, f64::min);
        let rel = (objective(eps, k, &c) - grid_min) / grid_min;
        worst = worst.max(rel.abs());
    }
    ensure(worst < 1e-3, format!("k_epsilon objective off by {worst:e}"))?;
    ensure(PersistenceConstants::new(1.0, [1.0; 4], 0.5, 0.4, 1.0, 1).is_err(), "mu + nu <= 1 accepted")?;
    let th = persistence_thresholds(&consts, 1.0).map_err(|e| e.to_string())?;
    ensure(th.eps_star > 0.0, "eps_star not positive")?;
    let nodes = intersect_persistence(&config(Command::Persist, "persistence_toy", &[])).map_err(|e| e.to_string())?;
    let ratio = nodes.iter().map(|n| n.max_ratio).fold(0.0, f64::max);
    ensure(ratio <= 0.5, format!("defect ratio {ratio}"))?;
    Ok(format!(
        "k_eps within {worst:.1e} of grid, eps* = {:.4}, intersection over {} nodes with max ratio {ratio:.1e}",
        th.eps_star,
        nodes.len()
    ))
}

fn criterion_9() -> Outcome {
    let spec = RapidOscSpec::default_instance();
    let n = 10_000;
    let s = |i: usize| TAU * i as f64 / n as f64;
    let ratio: Vec<f64> = (0..n).map(|i| -s(i).sin() / (4.0 + s(i).cos())).collect();
    let e = ratio.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l = (0..n).map(|i| s(i).sin().abs() * e + s(i).cos().abs()).fold(0.0, f64::max);
    let dmin = (0..n).map(|i| 4.0 + s(i).cos()).fold(f64::INFINITY, f64::min);
    ensure((spec.e - e).abs() < 1e-4, format!("E {} vs {e}", spec.e))?;
    ensure((spec.l - l).abs() < 1e-4, format!("L {} vs {l}", spec.l))?;
    let mut worst: f64 = 0.0;
    for r in 1..=4 {
        let rep = rapid_osc_condition(&spec, r).map_err(|e| e.to_string())?;
        let oracle = dmin - (r as f64 + 1.0) / (r as f64).sqrt() * l.sqrt();
        worst = worst.max((rep.margin - oracle).abs());
    }
    ensure(worst < 1e-4, format!("margin off by {worst:e}"))?;
    let flat = RapidOscSpec::constant(3.0, -1.0).map_err(|e| e.to_string())?;
    ensure(flat.l == 0.0, "constant case has L != 0")?;
    for r in 1..=12 {
        ensure(rapid_osc_condition(&flat, r).map_err(|e| e.to_string())?.passed, format!("constant case fails at r={r}"))?;
    }
    ensure(rapid_osc_max_order(&flat) == 12, "constant case stops below the cap")?;
    Ok(format!("E={:.6} L={:.6}, margins within {worst:.1e}; constant case certified to r=12", spec.e, spec.l))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("table reproduction", criterion_1),
        ("nestedness", criterion_2),
        ("counterexample", criterion_3),
        ("manifold oracle", criterion_4),
        ("torus computation", criterion_5),
        ("cone lemmas", criterion_6),
        ("cocycle and vectorization", criterion_7),
        ("weak-hyperbolicity thresholds", criterion_8),
        ("rapid oscillation", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
