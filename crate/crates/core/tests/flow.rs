use std::collections::BTreeMap;

use invman_core::flow::*;
use invman_core::hypotheses::check_hyp2;
use invman_core::manifold::FnGraph;
use invman_core::systems::build_system;
use invman_core::{FnField, Matrix, Point, SplitField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix<f64> {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0))
}

#[test]
fn vec_identity_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let (p, q, r, s) = (rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..5));
        let a = random_matrix(&mut rng, p, q);
        let x = random_matrix(&mut rng, q, r);
        let b = random_matrix(&mut rng, r, s);
        let lhs = vec(&a.matmul(&x).unwrap().matmul(&b).unwrap());
        let rhs = kron(&b.transpose(), &a).mul_vec(&vec(&x)).unwrap();
        let scale = lhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in lhs.iter().zip(&rhs) {
            assert!((u - v).abs() <= 64.0 * f64::EPSILON * scale);
        }
        assert_eq!(unvec(&vec(&x), q, r).unwrap(), x);
    }
}

#[test]
fn column_stacking_order() {
    let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(vec(&m), vec![1.0, 3.0, 2.0, 4.0]);
}

fn system(name: &str) -> std::sync::Arc<FnField<f64>> {
    build_system(name, &BTreeMap::new()).unwrap().field
}

fn start_point(name: &str, rng: &mut ChaCha8Rng) -> Point<f64> {
    let spec = build_system(name, &BTreeMap::new()).unwrap();
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
    Point::new(a, z).unwrap()
}

#[test]
fn cocycle_on_every_system() {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in invman_core::systems::SYSTEM_NAMES {
        let f = system(name);
        // rapid_osc rotates fast; the torus radial equation blows up in finite time
        let span = match name {
            "rapid_osc" => 0.2,
            "torus_family" => 0.25,
            _ => 2.0,
        };
        for _ in 0..3 {
            let x = start_point(name, &mut rng);
            let (t, tau) = (rng.gen_range(0.0..span), rng.gen_range(0.0..span));
            let (_, direct) = variational_final(&*f, &x, t + tau, tol).unwrap_or_else(|e| panic!("{name} {x:?} {e}"));
            let (xt, qt) = variational_final(&*f, &x, t, tol).unwrap();
            let (_, qtau) = variational_final(&*f, &xt, tau, tol).unwrap();
            let composed = qtau.matmul(&qt).unwrap();
            let res = (&direct - &composed).frobenius_norm() / direct.frobenius_norm().max(1.0);
            assert!(res < 100.0 * tol, "{name}: residual {res:e}");
        }
    }
}

#[test]
fn variational_starts_at_identity_and_matches_exp() {
    let f = FnField::new(1, 1, |a: &[f64], z: &[f64]| vec![a[0] + z[0]], |_a: &[f64], z: &[f64]| vec![-z[0]]);
    let x = Point::new(vec![0.2], vec![0.7]).unwrap();
    let path = variational(&f, &x, 1.5, 1e-11).unwrap();
    assert_eq!(path.matrices[0], Matrix::identity(2));
    let t: f64 = 1.5;
    let q = path.matrices.last().unwrap();
    let exact = [t.exp(), (t.exp() - (-t).exp()) / 2.0, 0.0, (-t).exp()];
    for (u, v) in q.as_slice().iter().zip(exact) {
        assert!((u - v).abs() < 1e-8);
    }
}

#[test]
fn time_reversal_and_step_halving_on_torus() {
    let f = system("torus_family");
    let tol = 1e-10;
    let x0 = Point::new(vec![0.05], vec![0.3, 1.2]).unwrap();
    // backward first: the a-direction contracts in reverse time
    let back = integrate(&*f, &x0, -1.0, tol, None).unwrap();
    let fwd = integrate(&*f, back.final_state(), 1.0, tol, None).unwrap();
    let d = invman_core::scalar::dist(&fwd.final_state().to_state(), &x0.to_state());
    assert!(d < 100.0 * tol * 10.0, "{d:e}");
    assert!(back.times.windows(2).all(|w| w[1] < w[0]));

    let full = integrate(&*f, &x0, -0.8, tol, None).unwrap();
    let half = integrate(&*f, &x0, -0.4, tol, None).unwrap();
    let two = integrate(&*f, half.final_state(), -0.4, tol, None).unwrap();
    let d = invman_core::scalar::dist(&full.final_state().to_state(), &two.final_state().to_state());
    assert!(d < 10.0 * tol * 10.0, "{d:e}");
}

#[test]
fn riccati_contracts_at_rate_two() {
    let f = system("decoupled_toy");
    let g = FnGraph::new(1, 1, |z: &[f64]| vec![z[0].sin() / 2.0]);
    let z: f64 = 0.9;
    let errs: Vec<f64> = (1..=6)
        .map(|t| {
            let p = riccati_integrate(&*f, &g, &[z], &Matrix::zeros(1, 1), -(t as f64), 1e-13).unwrap();
            (p.final_v()[(0, 0)] - z.cos() / 2.0).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let slope = (w[1] / w[0]).ln();
        assert!(slope <= -2.0 + 1e-3, "slope {slope}");
    }
}

#[test]
fn decoupled_lift() {
    let f = system("decoupled_toy");
    let g = FnGraph::new(1, 1, |z: &[f64]| vec![z[0].sin() / 2.0])
        .with_z_bounds(vec![invman_core::ZBound::Periodic { period: std::f64::consts::TAU }]);
    let s1 = 0.5;
    let lift = lift_level1(&*f, &g, s1, 0.6).unwrap();
    assert_eq!((lift.n(), lift.m()), (1, 1));
    for &(v, zeta) in &[(0.1, 0.3), (-0.4, 5.0), (0.0, 11.0)] {
        assert!((lift.f1(&[v], &[zeta]).unwrap()[0] - (2.0 * v - (s1 * zeta).cos())).abs() < 1e-12);
        assert_eq!(lift.gamma1(&[zeta]).unwrap(), vec![0.0]);
        assert_eq!(lift.alpha1(&[zeta]).unwrap(), 2.0);
        assert_eq!(lift.ell1(&[zeta]).unwrap(), 0.0);
    }
    let dom = lift.domain().unwrap();
    assert!(check_hyp2(&lift, &dom, 33, 1.0).unwrap().passed);
    let s = default_sigma1(&*f, &g, 0.6, 0.5, 33).unwrap();
    assert!((s - 0.25).abs() < 1e-3, "{s}");
}

#[test]
fn lift_dimension_is_nm() {
    let f = system("torus_family");
    let g = FnGraph::new(1, 2, |_z: &[f64]| vec![0.0]).with_z_bounds(vec![
        invman_core::ZBound::Periodic { period: std::f64::consts::TAU },
        invman_core::ZBound::Periodic { period: 10.0 * std::f64::consts::TAU },
    ]);
    let lift = lift_level1(&*f, &g, 0.1, 0.9).unwrap();
    assert_eq!((lift.n(), lift.m()), (2, 2));
    assert_eq!(lift.f(&[0.1, 0.2], &[1.0, 2.0]).len(), 2);
}

fn jordan_check(block: &Matrix<f64>, r: f64, c: f64) {
    let (_, p) = jordan_rescale(block, c).unwrap();
    let lmin = p.sym_min_eigenvalue().unwrap();
    assert!(lmin >= r - c - 1e-12, "{lmin} < {}", r - c);
}

#[test]
fn jordan_blocks() {
    let b = Matrix::from_rows(&[vec![1.5, 1.0], vec![0.0, 1.5]]).unwrap();
    let (_, p): (Vec<f64>, Matrix<f64>) = jordan_rescale(&b, 0.2).unwrap();
    assert!((p.sym_min_eigenvalue().unwrap() - (1.5 - 0.1)).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let r = rng.gen_range(-1.0..2.0);
        let w: f64 = rng.gen_range(0.1..3.0);
        let c = rng.gen_range(0.01..0.5);
        // three rotation blocks chained by identities
        let mut m = Matrix::zeros(6, 6);
        for k in 0..3 {
            let rot = Matrix::from_rows(&[vec![r, -w], vec![w, r]]).unwrap();
            m.set_block(2 * k, 2 * k, &rot);
            if k < 2 {
                m.set_block(2 * k, 2 * k + 2, &Matrix::identity(2));
            }
        }
        jordan_check(&m, r, c);
        let mut chain = Matrix::from_diag(&[r; 4]);
        for i in 0..3 {
            chain[(i, i + 1)] = 1.0;
        }
        jordan_check(&chain, r, c);
    }
}
