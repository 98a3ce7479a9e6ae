use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use zsb::potential::Potential;
use zsb::spectrum::{gap_check, locate_spectrum};
use zsb::zs_core::galerkin_eigenvalues;

#[test]
fn zero_potential_spectrum() {
    let sd = locate_spectrum(&Potential::zero(), 8, 1e-10).unwrap();
    for n in sd.indices() {
        let c = n as f64 * PI;
        assert!((sd.lam_minus(n) - c).norm() < 1e-10);
        assert!((sd.lam_plus(n) - c).norm() < 1e-10);
        assert!((sd.lam_dot(n) - c).norm() < 1e-10);
        assert!(!sd.is_open(n));
    }
    assert!(gap_check(&sd, &Potential::zero()).lamdot_offset.is_empty());
}

#[test]
fn constant_potential_single_gap() {
    let a = 0.3;
    let sd = locate_spectrum(&Potential::constant(a), 16, 1e-10).unwrap();
    assert!((sd.gamma(0) - 2.0 * a).norm() < 1e-10);
    assert_eq!(sd.open_gaps(), vec![0]);
    for n in (-16..=16).filter(|&n| n != 0) {
        let v = (n as f64).signum() * ((n as f64 * PI).powi(2) + a * a).sqrt();
        assert!((sd.tau(n) - v).norm() < 1e-10);
    }
}

#[test]
fn matches_galerkin() {
    let phi = Potential::real_type([(1, C64::new(0.15, 0.05)), (-2, C64::new(0.05, -0.1))].into_iter().collect());
    let sd = locate_spectrum(&phi, 10, 1e-10).unwrap();
    let ev = galerkin_eigenvalues(&phi, 60).unwrap();
    for n in -8..=8 {
        for z in [sd.lam_minus(n), sd.lam_plus(n)] {
            let d = ev.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "n = {n}: {d}");
        }
    }
}

#[test]
fn gap_report_sequences() {
    let phi = Potential::cosines(&[(1, 0.2), (2, 0.1)]);
    let sd = locate_spectrum(&phi, 12, 1e-10).unwrap();
    let r = gap_check(&sd, &phi);
    assert_eq!(r.gap_length.len(), 25);
    assert!(!r.lamdot_offset.is_empty());
    // finite-gap potential: far gaps are collapsed
    assert!(r.gap_length.iter().filter(|(n, _)| n.abs() > 8).all(|(_, g)| *g < 1e-9));
}

#[test]
fn rejects_bad_tolerance() {
    assert!(locate_spectrum(&Potential::zero(), 4, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn real_type_ordering(c in prop::collection::btree_map(-3i64..=3, (-0.15f64..0.15, -0.15f64..0.15), 1..4)) {
        let v: BTreeMap<i64, C64> = c.into_iter().map(|(n, (a, b))| (n, C64::new(a, b))).collect();
        let sd = locate_spectrum(&Potential::real_type(v), 6, 1e-10).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for n in sd.indices() {
            let (lm, ld, lp) = (sd.lam_minus(n), sd.lam_dot(n), sd.lam_plus(n));
            prop_assert!(lm.im.abs() < 1e-9 && lp.im.abs() < 1e-9 && ld.im.abs() < 1e-9);
            prop_assert!(prev <= lm.re + 1e-12);
            prop_assert!(lm.re <= ld.re + 1e-9 && ld.re <= lp.re + 1e-9);
            prop_assert!((sd.tau(n) - n as f64 * PI).norm() < PI / 5.0);
            prev = lp.re;
        }
    }
}
