use proptest::prelude::*;
use std::f64::consts::PI;
use zsb::evolution::{
    birkhoff_flow, demo_potential, shift_grid, step_mkdv, BirkhoffState, GridState, Mkdv,
};
use zsb::potential::Potential;
use zsb::ZsbError;

fn wave(g: usize, f: impl Fn(f64) -> f64) -> GridState {
    GridState::new((0..g).map(|j| f(j as f64 / g as f64)).collect()).unwrap()
}

#[test]
fn linear_dispersion() {
    // tiny amplitude: u ≈ ε cos(2π(x + (2π)² t))
    let eps = 1e-7;
    let u0 = wave(64, |x| eps * (2.0 * PI * x).cos());
    let t = 0.01;
    let (u, _) = Mkdv::new(64, false).evolve(&u0, t, 1e-4, 0).unwrap();
    let want = wave(64, |x| eps * (2.0 * PI * (x + 4.0 * PI * PI * t)).cos());
    let e = u.u.iter().zip(&want.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(e < 1e-12 * 1e7 * eps, "{e}");
}

#[test]
fn conserved_quantities() {
    let phi = Potential::cosines(&[(1, 0.3), (2, 0.1)]);
    let u0 = GridState::from_potential(&phi, 256).unwrap();
    let (_, s) = Mkdv::new(256, false).evolve(&u0, 0.02, 1e-5, 500).unwrap();
    let (a, b) = (s.first().unwrap(), s.last().unwrap());
    assert!(s.len() >= 3);
    assert!((a.mean - b.mean).abs() < 1e-13);
    assert!((a.l2 - b.l2).abs() < 1e-11);
    assert!((a.energy - b.energy).abs() < 1e-9 * a.energy);
}

#[test]
fn grid_potential_round_trip() {
    let phi = Potential::cosines(&[(1, 0.2), (3, -0.05)]);
    let g = GridState::from_potential(&phi, 64).unwrap();
    let back = g.to_potential(1e-14).unwrap();
    for n in -3..=3 {
        assert!((back.minus(n) - phi.minus(n)).norm() < 1e-15);
    }
    assert!(GridState::from_potential(&Potential::constant(0.1).scaled(1.0), 64).is_ok());
    assert!(GridState::new(vec![0.0; 100]).is_err());
}

#[test]
fn shift_is_translation() {
    let u = wave(32, |x| (2.0 * PI * x).sin());
    let s = shift_grid(&u.u, 0.25);
    let want = wave(32, |x| (2.0 * PI * (x - 0.25)).sin());
    assert!(s.iter().zip(&want.u).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn single_step_and_instability() {
    let u0 = wave(64, |x| 0.1 * (2.0 * PI * x).cos());
    let u1 = step_mkdv(&u0, 1e-4, true).unwrap();
    assert!((u1.t - 1e-4).abs() < 1e-18);
    let big = wave(64, |x| 50.0 * (2.0 * PI * x).cos() + 20.0 * (6.0 * PI * x).sin());
    match Mkdv::new(64, false).evolve(&big, 1.0, 0.05, 0) {
        Err(ZsbError::Instability { .. }) => {}
        other => panic!("expected an instability error, got {other:?}"),
    }
}

#[test]
fn unrenormalized_flow_needs_omega() {
    let bs = BirkhoffState::new(vec![1], vec![0.1], vec![0.0], vec![10.0], None).unwrap();
    assert!(matches!(birkhoff_flow(&bs, 1.0, false), Err(ZsbError::Divergence(_))));
    assert!(birkhoff_flow(&bs, 1.0, true).is_ok());
    assert!(BirkhoffState::new(vec![1], vec![-0.1], vec![0.0], vec![1.0], None).is_err());
}

#[test]
fn demo_truncations() {
    let v = demo_potential(0.3, 0.1, 8).unwrap();
    assert!(v.is_er());
    assert_eq!(v.coeffs_minus.len(), 16);
    assert!((v.minus(-8).re - 0.1 * 8f64.powf(-0.3)).abs() < 1e-16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn birkhoff_flow_is_a_group(th in 0.0..std::f64::consts::TAU, w in -100.0f64..100.0, s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let bs = BirkhoffState::new(vec![2], vec![0.3], vec![th], vec![w], Some(vec![w + 1.0])).unwrap();
        let a = birkhoff_flow(&birkhoff_flow(&bs, s, true).unwrap(), t, true).unwrap();
        let b = birkhoff_flow(&bs, s + t, true).unwrap();
        let d = (a.theta[0] - b.theta[0]).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) < 1e-9);
        prop_assert!(a.theta[0] >= 0.0 && a.theta[0] < 2.0 * PI);
        prop_assert_eq!(a.actions, bs.actions);
    }
}
