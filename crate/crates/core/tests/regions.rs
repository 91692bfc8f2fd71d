use std::f64::consts::TAU;

use invman_core::regions::*;
use proptest::prelude::*;

const REFERENCE_TABLE: [(f64, f64); 7] = [
    (0.395, 7.248),
    (0.404, 3.887),
    (0.420, 2.542),
    (0.441, 1.849),
    (0.472, 1.412),
    (0.518, 1.093),
    (0.634, 0.781),
];

#[test]
fn table_rows_and_nesting() {
    let rows: Vec<RegionInterval> = (1..=8).map(|r| beta_projection(r, 1e-4).unwrap()).collect();
    for (row, &(lo, hi)) in rows.iter().zip(&REFERENCE_TABLE) {
        let (a, b) = row.bounds.expect("nonempty");
        assert!((a - lo).abs() <= 0.005 && (b - hi).abs() <= 0.005, "r={} got ({a}, {b})", row.r);
    }
    assert!(rows[7].is_empty());
    assert!(rows[7].best_slack < 0.0);
    for w in rows[..7].windows(2) {
        let (a0, b0) = w[0].bounds.unwrap();
        let (a1, b1) = w[1].bounds.unwrap();
        assert!(a0 < a1 && b1 < b0);
    }
}

#[test]
fn best_auxiliary_is_a_member() {
    let (d, k, s) = best_auxiliary(0.7, 7).unwrap();
    assert!(s > 0.0);
    assert!(q_membership(0.7, d, k, 7).unwrap().member());
    // brute-force oracle on a fine grid cannot beat the optimiser
    let mut best = f64::NEG_INFINITY;
    for i in 1..=400 {
        for j in 1..=400 {
            let m = q_membership(0.7, 4.0 * i as f64 / 400.0, 20.0 * j as f64 / 400.0, 7).unwrap();
            best = best.max(m.min_slack());
        }
    }
    assert!(s >= best - 1e-9);
}

#[test]
fn small_beta_never_member() {
    for i in 1..=40 {
        for j in 1..=40 {
            assert!(!q_membership(0.2, 4.0 * i as f64 / 40.0, 20.0 * j as f64 / 40.0, 1).unwrap().member());
        }
    }
}

#[test]
fn membership_rejects_nonpositive() {
    assert!(q_membership(0.0, 1.0, 1.0, 1).is_err());
    assert!(q_membership(1.0, -1.0, 1.0, 1).is_err());
}

proptest! {
    #[test]
    fn higher_order_implies_lower(beta in 0.01f64..10.0, delta in 0.01f64..4.0, k in 0.01f64..20.0, r in 3u32..10) {
        let hi = q_membership(beta, delta, k, r).unwrap();
        if hi.order.unwrap() > 0.0 {
            prop_assert!(q_membership(beta, delta, k, r - 1).unwrap().order.unwrap() > 0.0);
        }
        if hi.member() {
            prop_assert!(q_membership(beta, delta, k, 1).unwrap().member());
        }
    }

    #[test]
    fn empty_at_order_eight(beta in 0.01f64..10.0, delta in 0.01f64..4.0, k in 0.01f64..20.0) {
        prop_assert!(!q_membership(beta, delta, k, 8).unwrap().member());
    }
}

fn brute_rapid() -> (f64, f64, f64) {
    let n = 10_000;
    let s = |i: usize| TAU * i as f64 / n as f64;
    let ratio: Vec<f64> = (0..n).map(|i| -s(i).sin() / (4.0 + s(i).cos())).collect();
    let e1 = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let e2 = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = e1.abs().max(e2.abs());
    let l = (0..n).map(|i| s(i).sin().abs() * e + s(i).cos().abs()).fold(0.0, f64::max);
    let dmin = (0..n).map(|i| 4.0 + s(i).cos()).fold(f64::INFINITY, f64::min);
    (e, l, dmin)
}

#[test]
fn rapid_matches_brute_force() {
    let spec = RapidOscSpec::default_instance();
    let (e, l, dmin) = brute_rapid();
    assert!((spec.e - e).abs() < 1e-4);
    assert!((spec.l - l).abs() < 1e-4);
    for r in 1..=4 {
        let rep = rapid_osc_condition(&spec, r).unwrap();
        let oracle = dmin - (r as f64 + 1.0) / (r as f64).sqrt() * l.sqrt();
        assert!((rep.margin - oracle).abs() < 1e-4, "r={r}");
    }
}

#[test]
fn rapid_margin_decreasing_in_r() {
    let spec = RapidOscSpec::default_instance();
    let m: Vec<f64> = (1..=12).map(|r| rapid_osc_condition(&spec, r).unwrap().margin).collect();
    assert!(m.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn rapid_constant_certifies_everything() {
    let spec = RapidOscSpec::constant(3.0, -1.0).unwrap();
    assert_eq!(spec.l, 0.0);
    for r in 1..=12 {
        let rep = rapid_osc_condition(&spec, r).unwrap();
        assert!(rep.passed && (rep.margin - 3.0).abs() < 1e-15);
    }
    assert_eq!(rapid_osc_max_order(&spec), 12);
}

fn toy_consts() -> PersistenceConstants {
    PersistenceConstants::new(1.0, [1.0, 1.0, 0.05, 0.05], 1.0, 1.0, 1.0, 1).unwrap()
}

#[test]
fn k_epsilon_beats_log_grid() {
    let cases = [
        (toy_consts(), 0.2),
        (PersistenceConstants::new(0.5, [0.3, 0.2, 0.1, 0.4], 0.7, 0.6, 1.3, 3).unwrap(), 0.01),
        (PersistenceConstants::new(1.0, [1.0; 4], 1.0, 1.0, 1.0, 2).unwrap(), 0.3),
    ];
    for (c, eps) in cases {
        let k = k_epsilon(eps, &c).unwrap();
        let best = k_objective(eps, k, &c);
        let grid_min = (0..1000)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0))
            .map(|kk| k_objective(eps, kk, &c))
            .fold(f64::INFINITY, f64::min);
        assert!(best <= grid_min * (1.0 + 1e-12));
        assert!((grid_min - best) / best < 1e-3);
        assert!((best - k_objective_infimum(eps, &c)).abs() < 1e-12 * best.max(1.0));
    }
}

#[test]
fn kappa_limit() {
    let c = toy_consts();
    let ratios: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&eps| {
            let k = k_epsilon(eps, &c).unwrap();
            kappa(eps, k, delta_for(eps, &c), &c) / (eps * c.sigma)
        })
        .collect();
    assert!(ratios.windows(2).all(|w| (1.0 - w[1]).abs() < (1.0 - w[0]).abs()));
    assert!((1.0 - ratios[3]).abs() < 1e-2);
}

#[test]
fn kappa_direct_arithmetic() {
    let c = PersistenceConstants::new(2.0, [0.1, 0.2, 0.3, 0.4], 1.0, 0.5, 2.0, 2).unwrap();
    let (eps, k, d) = (0.1f64, 1.5, 0.05);
    let kk = [9.0 * 0.2 * 1.5, 4.0 * 0.1, 17.5 * 0.4, 2.0 * 0.4, 4.0 * 0.4, 9.0 * 0.4, 9.0 * 0.4];
    let oracle = eps * 2.0
        - eps * (kk[0] * d + kk[1] * d * d + eps * kk[2] + eps.powi(2) * kk[3] + k * eps * kk[4]
            + (eps.powf(-0.5) * kk[5] + eps.powi(2) * kk[6]) / k);
    assert!((kappa(eps, k, d, &c) - oracle).abs() < 1e-14);
}

#[test]
fn thresholds_toy_and_monotone() {
    let t = persistence_thresholds(&toy_consts(), 1.0).unwrap();
    assert!(t.eps_star > 0.3 && t.eps_star < 1.0 && !t.at_ceiling, "{t}");
    assert!((t.delta_star - 0.1 * t.eps_star).abs() < 1e-12);
    let smaller = PersistenceConstants::new(1.0, [0.8, 0.8, 0.04, 0.04], 1.0, 1.0, 1.0, 1).unwrap();
    assert!(persistence_thresholds(&smaller, 1.0).unwrap().eps_star >= t.eps_star);
}

#[test]
fn thresholds_reject_exponents() {
    let mut c = toy_consts();
    c.nu = 0.0;
    assert!(persistence_thresholds(&c, 1.0).is_err());
}

#[test]
fn counterexample_eigenvalues() {
    let (eps, alpha) = (0.1f64, 0.1f64);
    let fps = counterexample_fixed_points(eps, alpha).unwrap();
    assert_eq!(fps.len(), 2);
    let a2 = alpha * alpha;
    // closed-form roots of λ² + ελ ∓ α²
    let s = (eps * eps + 4.0 * a2).sqrt();
    let saddle = [(-eps + s) / 2.0, (-eps - s) / 2.0];
    assert_eq!(fps[0].kind, FixedPointKind::Saddle);
    for (ev, o) in fps[0].eigenvalues.iter().zip(saddle) {
        assert!((ev.re - o).abs() < 1e-10 && ev.im.abs() < 1e-10);
    }
    assert!(fps[0].eigenvalues[0].re * fps[0].eigenvalues[1].re < 0.0);
    let im = (4.0 * a2 - eps * eps).sqrt() / 2.0;
    assert_eq!(fps[1].kind, FixedPointKind::StableSpiral);
    assert!((fps[1].eigenvalues[0].re + eps / 2.0).abs() < 1e-10);
    assert!((fps[1].eigenvalues[0].im.abs() - im).abs() < 1e-10);
    for fp in &fps {
        // residual of the planar field
        assert!((-eps * fp.w + a2 * fp.theta.sin()).abs() < 1e-15 && fp.w == 0.0);
    }
}

#[test]
fn counterexample_node_below_half_eps() {
    for alpha in [0.01, 0.025, 0.049] {
        assert_eq!(counterexample_fixed_points(0.1, alpha).unwrap()[1].kind, FixedPointKind::StableNode);
    }
    assert_eq!(counterexample_fixed_points(0.1, 0.051).unwrap()[1].kind, FixedPointKind::StableSpiral);
    let deg = counterexample_fixed_points(0.1, 0.0).unwrap();
    assert_eq!(deg[0].kind, FixedPointKind::Degenerate);
}
