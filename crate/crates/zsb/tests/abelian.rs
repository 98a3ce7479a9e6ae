use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use zsb::pipeline::Pipeline;
use zsb::potential::{hamiltonians, Potential};
use zsb::roots_products::Side;
use zsb::ZsbError;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn two_mode() -> Pipeline {
    Pipeline::new(&Potential::cosines(&[(1, 0.2), (2, 0.1)]), 16, None, 1e-10).unwrap()
}

#[test]
fn zero_potential_primitive() {
    let pl = Pipeline::new(&Potential::zero(), 8, None, 1e-10).unwrap();
    for n in -3..=3i64 {
        for z in [C64::new(1.0, 0.5), C64::new(-6.0, -0.2), C64::new(4.4, 0.0)] {
            let f = pl.ab.f_n(n, z, None).unwrap();
            assert!((f + I * (z - n as f64 * PI)).norm() < 1e-11);
        }
    }
}

#[test]
fn path_matches_real_line_formula() {
    let pl = two_mode();
    for x in [0.5, 1.7, 4.5, 8.0, -2.2, -11.0] {
        let a = pl.ab.f(C64::new(x, 0.0), None).unwrap();
        let b = pl.ab.f_realline(x).unwrap();
        assert!((a - b).norm() < 1e-9, "{x}: {a} vs {b}");
    }
}

#[test]
fn branches_differ_by_multiples_of_i_pi() {
    let pl = two_mode();
    for z in [C64::new(2.0, 0.7), C64::new(-5.0, 0.3)] {
        let f0 = pl.ab.f(z, None).unwrap();
        for n in [-2i64, 1, 3] {
            let fnv = pl.ab.f_n(n, z, None).unwrap();
            assert!((fnv - f0 - I * n as f64 * PI).norm() < 1e-7, "{z} {n}: {}", fnv - f0);
        }
    }
}

#[test]
fn gap_sides_and_errors() {
    let pl = two_mode();
    let t = pl.sd.tau(1);
    match pl.ab.f_n(1, t, None) {
        Err(ZsbError::Domain(_)) => {}
        other => panic!("expected a domain error, got {other:?}"),
    }
    let p = pl.ab.f_n(1, t, Some(Side::Plus)).unwrap();
    let m = pl.ab.f_n(1, t, Some(Side::Minus)).unwrap();
    assert!((p + m).norm() < 1e-9, "{p} {m}");
    // F_n vanishes at both ends of its own gap
    let e = pl.ab.f_n(1, pl.sd.lam_plus(1), Some(Side::Plus)).unwrap();
    assert!(e.norm() < 1e-6, "{e}");
}

#[test]
fn contours_close() {
    let pl = two_mode();
    for k in [-2i64, -1, 1, 2] {
        let c = pl.ab.contour_converged(k, 1e-10).unwrap();
        assert!(c.closure < 1e-12);
        let fa = pl.ab.f_n(k, c.nodes[0], None).unwrap();
        assert!((c.f[0] - fa).norm() < 1e-7, "{k}");
    }
}

#[test]
fn laurent_recovers_hamiltonians() {
    let phi = Potential::real_type([(1, C64::new(0.08, 0.03)), (-1, C64::new(0.02, -0.04))].into_iter().collect());
    let pl = Pipeline::new(&phi, 16, None, 1e-10).unwrap();
    let fit = pl.ab.laurent_fit(6, 80, 14).unwrap();
    let h = hamiltonians(&phi).as_array();
    for (j, (hj, fj)) in h.iter().zip(&fit.h).enumerate() {
        assert!((fj - hj).norm() < 1e-5 * hj.norm().max(1e-3), "H{}: {fj} vs {hj}", j + 1);
    }
    assert!((fit.f4_combo - fit.f4_combo_fit).norm() < 1e-3 * (1.0 + fit.f4_combo.norm()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn real_type_conjugation_symmetry(x in -10.0f64..10.0, y in 0.2f64..2.0) {
        // F(λ̄) = −conj F(λ) for real-type potentials
        let pl = two_mode();
        let z = C64::new(x, y);
        let f = pl.ab.f(z, None).unwrap();
        let fc = pl.ab.f(z.conj(), None).unwrap();
        prop_assert!((fc + f.conj()).norm() < 1e-8, "{} {}", f, fc);
    }
}
