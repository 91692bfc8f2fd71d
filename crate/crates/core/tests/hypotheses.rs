use std::collections::BTreeMap;
use std::f64::consts::TAU;

use invman_core::hypotheses::*;
use invman_core::manifold::{GraphManifold, ZGrid};
use invman_core::regions::best_auxiliary;
use invman_core::systems::build_system;
use invman_core::{BoxDomain, Error, FnField, Matrix, Point, ZBound};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

fn quad(m: &Matrix<f64>, u: [f64; 2]) -> f64 {
    let mu = m.mul_vec(&u).unwrap();
    u[0] * mu[0] + u[1] * mu[1]
}

fn stretch(m: &Matrix<f64>, u: [f64; 2]) -> f64 {
    m.mul_vec(&u).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn rates_are_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let blocks: Vec<Matrix<f64>> =
            (0..4).map(|_| Matrix::from_fn(2, 2, |_, _| rng.gen_range(-2.0..2.0))).collect();
        let (aa, az, za, zz) = (blocks[0].clone(), blocks[1].clone(), blocks[2].clone(), blocks[3].clone());
        let (f_aa, f_az, f_za, f_zz) = (aa.clone(), az.clone(), za.clone(), zz.clone());
        let field = FnField::new(
            2,
            2,
            move |a: &[f64], z: &[f64]| {
                let x = f_aa.mul_vec(a).unwrap();
                let y = f_az.mul_vec(z).unwrap();
                vec![x[0] + y[0], x[1] + y[1]]
            },
            move |a: &[f64], z: &[f64]| {
                let x = f_za.mul_vec(a).unwrap();
                let y = f_zz.mul_vec(z).unwrap();
                vec![x[0] + y[0], x[1] + y[1]]
            },
        );
        let r = pointwise_rates(&field, &Point::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap()).unwrap();
        // bounds hold along random directions
        for _ in 0..100 {
            let u = unit(rng.gen_range(0.0..TAU));
            assert!(r.alpha <= quad(&aa, u) + 1e-6);
            assert!(r.ell >= quad(&zz, u) - 1e-6);
            assert!(r.dzf_norm >= stretch(&az, u) - 1e-6);
            assert!(r.dag_norm >= stretch(&za, u) - 1e-6);
        }
        // and are attained on a fine circle
        let circle: Vec<[f64; 2]> = (0..20000).map(|i| unit(TAU * i as f64 / 20000.0)).collect();
        let min_q = circle.iter().map(|&u| quad(&aa, u)).fold(f64::INFINITY, f64::min);
        let max_q = circle.iter().map(|&u| quad(&zz, u)).fold(f64::NEG_INFINITY, f64::max);
        let n_az = circle.iter().map(|&u| stretch(&az, u)).fold(0.0, f64::max);
        let n_za = circle.iter().map(|&u| stretch(&za, u)).fold(0.0, f64::max);
        assert!((r.alpha - min_q).abs() < 1e-4);
        assert!((r.ell - max_q.max(0.0)).abs() < 1e-4);
        assert!((r.dzf_norm - n_az).abs() < 1e-4);
        assert!((r.dag_norm - n_za).abs() < 1e-4);
    }
}

#[test]
fn decoupled_passes_and_slackless_fails() {
    let spec = build_system("decoupled_toy", &BTreeMap::new()).unwrap();
    let rep = check_hyp2(&*spec.field, &spec.domain, 33, 0.9).unwrap();
    assert!(rep.passed && (rep.margin - 0.1).abs() < 1e-6);

    let f = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![a[0] - z[0]], |_a: &[f64], _z: &[f64]| vec![0.0]);
    let dom = BoxDomain::new(vec![(-1.0, 1.0)], vec![ZBound::Finite { lo: -1.0, hi: 1.0 }]).unwrap();
    let rep = check_hyp2(&f, &dom, 9, 1e-3).unwrap();
    assert!(!rep.passed);
    assert!(rep.margin < 0.0);
}

#[test]
fn hyp2star_non_increasing_in_order() {
    let spec = build_system("torus_family", &params(&[("beta", 1.2), ("k", 1.5), ("delta", 0.4)])).unwrap();
    let margins: Vec<f64> = (2..=9)
        .map(|r| check_hyp2star(&*spec.field, &spec.domain, 17, r, 1e-3).unwrap().margin)
        .collect();
    for w in margins.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{margins:?}");
    }
}

fn finite_torus(beta: f64) -> (invman_core::systems::SystemSpec, BoxDomain<f64>) {
    let spec = build_system("torus_family", &params(&[("beta", beta)])).unwrap();
    let dom = BoxDomain::new(
        spec.domain.a_bounds.clone(),
        vec![ZBound::Finite { lo: 0.0, hi: TAU }, ZBound::Finite { lo: 0.0, hi: 10.0 * TAU }],
    )
    .unwrap();
    (spec, dom)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // closed axes with d and 2d - 1 points give nested grids
    #[test]
    fn refinement_never_raises_margin(d in 3usize..10, beta in 0.5f64..3.0) {
        let (spec, dom) = finite_torus(beta);
        let coarse = check_hyp2(&*spec.field, &dom, d, 1e-3).unwrap().margin;
        let fine = check_hyp2(&*spec.field, &dom, 2 * d - 1, 1e-3).unwrap().margin;
        prop_assert!(fine <= coarse + 1e-12);
    }
}

#[test]
fn certified_orders() {
    let spec = build_system("decoupled_toy", &BTreeMap::new()).unwrap();
    assert!(max_certified_order(&*spec.field, &spec.domain, 33, 0.1).unwrap() >= 10);

    let (delta, k, _) = best_auxiliary(0.7, 7).unwrap();
    let spec = build_system(
        "torus_family",
        &params(&[("beta", 0.7), ("delta", delta), ("k", k), ("gamma", 0.01)]),
    )
    .unwrap();
    let r = max_certified_order(&*spec.field, &spec.domain, 33, 0.01).unwrap();
    assert_eq!(r, 7);

    let bad = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![a[0] - z[0]], |_a: &[f64], _z: &[f64]| vec![0.0]);
    let dom = BoxDomain::new(vec![(-1.0, 1.0)], vec![ZBound::Periodic { period: 1.0 }]).unwrap();
    assert_eq!(max_certified_order(&bad, &dom, 9, 1e-3).unwrap(), 0);
}

fn decoupled_graph() -> GraphManifold<f64> {
    let spec = build_system("decoupled_toy", &BTreeMap::new()).unwrap();
    let grid = ZGrid::over(&spec.domain, &[32]).unwrap();
    GraphManifold::from_fn(grid, spec.domain.clone(), |z: &[f64]| vec![z[0].sin() / 2.0]).unwrap()
}

#[test]
fn hyp5_on_decoupled_graph() {
    let spec = build_system("decoupled_toy", &BTreeMap::new()).unwrap();
    let g = decoupled_graph();
    let opts = Hyp5Options::default();
    let rep = check_hyp5(&*spec.field, &g, Some(0.6), 3, 0.5, 17, &opts).unwrap();
    assert!(rep.passed);
    assert!((rep.margin - 1.5).abs() < 1e-6);
    assert_eq!(rep.samples, 17 * 3);
    assert!(rep.warnings.iter().any(|w| w.contains("attested")));
    let attested = Hyp5Options { higher_derivatives_attested: true, ..opts };
    assert!(check_hyp5(&*spec.field, &g, Some(0.6), 3, 0.5, 17, &attested).unwrap().warnings.is_empty());

    match check_hyp5(&*spec.field, &g, Some(0.4), 3, 0.5, 17, &opts) {
        Err(Error::Precondition(_)) => {}
        other => panic!("expected a precondition error, got {other:?}"),
    }
    assert!(check_hyp5(&*spec.field, &g, None, 3, 0.5, 17, &opts).unwrap().passed);
}

#[test]
fn hyp5_sees_the_coupling() {
    // ż = a couples the slow direction to the graph, so η enters the margin
    let f = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![2.0 * a[0] - z[0].sin()], |a: &[f64], _z: &[f64]| vec![a[0]]);
    let g = decoupled_graph();
    let rep = check_hyp5(&f, &g, Some(0.6), 2, 0.1, 17, &Hyp5Options::default()).unwrap();
    assert!((rep.margin - (2.0 - 3.0 * 0.6 - 0.1)).abs() < 1e-6);
}

#[test]
fn invalid_constants_rejected() {
    let spec = build_system("decoupled_toy", &BTreeMap::new()).unwrap();
    assert!(check_hyp2(&*spec.field, &spec.domain, 9, 0.0).is_err());
    assert!(check_hyp2star(&*spec.field, &spec.domain, 9, 1, 0.1).is_err());
    assert!(check_hyp2star(&*spec.field, &spec.domain, 9, 3, -0.1).is_err());
}
