use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use zsb::potential::Potential;
use zsb::zs_core::{discriminant, galerkin_eigenvalues, transfer, ZsSolver};

#[test]
fn zero_potential_is_rotation() {
    for x in [-20.0, -3.3, 0.0, 0.7, 11.0] {
        let z = C64::new(x, 0.4);
        let (d, dd) = discriminant(&Potential::zero(), z).unwrap();
        assert!((d - 2.0 * z.cos()).norm() < 1e-12);
        assert!((dd + 2.0 * z.sin()).norm() < 1e-12);
    }
}

#[test]
fn constant_potential_closed_form() {
    // Δ = 2cos√(λ² − a²)
    let a = 0.3;
    let phi = Potential::constant(a);
    for x in [0.1, 1.0, 5.0, 40.0] {
        let z = C64::new(x, 0.2);
        let (d, _) = discriminant(&phi, z).unwrap();
        let want = 2.0 * (z * z - a * a).sqrt().cos();
        assert!((d - want).norm() < 1e-11 * (1.0 + want.norm()), "{x}: {d} vs {want}");
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let phi = Potential::cosines(&[(1, 0.4), (3, 0.2)]);
    let s = ZsSolver::new(&phi);
    let z = C64::new(2.3, 0.1);
    let h = 1e-5;
    let (_, dd) = s.discriminant(z).unwrap();
    let fd = (s.discriminant(z + h).unwrap().0 - s.discriminant(z - h).unwrap().0) / (2.0 * h);
    assert!((dd - fd).norm() < 1e-7);
}

#[test]
fn rejects_huge_lambda() {
    assert!(transfer(&Potential::zero(), C64::new(1e6, 0.0)).is_err());
    assert!(transfer(&Potential::zero(), C64::new(f64::NAN, 0.0)).is_err());
}

#[test]
fn galerkin_constant_potential() {
    let a = 0.3;
    let ev = galerkin_eigenvalues(&Potential::constant(a), 40).unwrap();
    assert!(ev.iter().any(|e| (e - a).norm() < 1e-12));
    assert!(ev.iter().any(|e| (e + a).norm() < 1e-12));
    let w = (std::f64::consts::PI.powi(2) + a * a).sqrt();
    assert_eq!(ev.iter().filter(|e| (*e - w).norm() < 1e-10).count(), 2);
    assert!(galerkin_eigenvalues(&Potential::cosines(&[(4, 0.1)]), 8).is_err());
}

fn small_potential() -> impl Strategy<Value = Potential> {
    prop::collection::btree_map(-3i64..=3, (-0.3f64..0.3, -0.3f64..0.3).prop_map(|(a, b)| C64::new(a, b)), 1..5)
        .prop_map(|v: BTreeMap<i64, C64>| Potential::real_type(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unimodular(phi in small_potential(), x in -30.0f64..30.0, y in -2.0f64..2.0) {
        let r = transfer(&phi, C64::new(x, y)).unwrap();
        prop_assert!((r.det() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn real_type_discriminant_real_on_axis(phi in small_potential(), x in -30.0f64..30.0) {
        let (d, dd) = discriminant(&phi, C64::new(x, 0.0)).unwrap();
        prop_assert!(d.im.abs() < 1e-11);
        prop_assert!(dd.im.abs() < 1e-10);
    }

    #[test]
    fn conjugation_symmetry(phi in small_potential(), x in -20.0f64..20.0, y in 0.1f64..2.0) {
        let z = C64::new(x, y);
        let (a, _) = discriminant(&phi, z).unwrap();
        let (b, _) = discriminant(&phi, z.conj()).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-10 * (1.0 + a.norm()));
    }
}
