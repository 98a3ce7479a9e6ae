use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;
use zsb::potential::Potential;
use zsb::roots_products::{hurwitz_zeta, sine_tail, RootContext, Side};
use zsb::spectrum::locate_spectrum;
use zsb::zs_core::discriminant;

fn ctx(phi: &Potential, n: usize) -> RootContext {
    let sd = Arc::new(locate_spectrum(phi, n, 1e-10).unwrap());
    RootContext::new(sd, RootContext::default_tail(n)).unwrap()
}

#[test]
fn hurwitz_values() {
    assert!((hurwitz_zeta(2, 1.0) - PI * PI / 6.0).abs() < 1e-14);
    assert!((hurwitz_zeta(4, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
    assert!((hurwitz_zeta(2, 3.0) - (PI * PI / 6.0 - 1.25)).abs() < 1e-14);
}

#[test]
fn sine_tail_matches_closed_forms() {
    // sin z = z Π (1 − z²/(πm)²), Σ_{m≥1} 1/((πm)² − z²) = 1/(2z²) − cot z/(2z)
    let z = C64::new(1.3, 0.4);
    let (log_s, inv_s) = sine_tail(z, PI, 5);
    let mut head = C64::new(1.0, 0.0);
    let mut inv_head = C64::new(0.0, 0.0);
    for m in 1..=5 {
        let pm = PI * m as f64;
        head *= 1.0 - (z / pm) * (z / pm);
        inv_head += 1.0 / (pm * pm - z * z);
    }
    let log_want = (z.sin() / (z * head)).ln();
    let inv_want = 1.0 / (2.0 * z * z) - z.cos() / z.sin() / (2.0 * z) - inv_head;
    assert!((log_s - log_want).norm() < 1e-13, "{log_s} vs {log_want}");
    assert!((inv_s - inv_want).norm() < 1e-13, "{inv_s} vs {inv_want}");
}

#[test]
fn root_squares_to_discriminant() {
    for phi in [Potential::cosines(&[(1, 0.3), (2, 0.1)]), Potential::real_type([(1, C64::new(0.1, 0.1))].into_iter().collect())] {
        let c = ctx(&phi, 16);
        for z in [C64::new(0.4, 0.3), C64::new(-7.0, 0.8), C64::new(12.0, -0.5)] {
            let (d, dd) = discriminant(&phi, z).unwrap();
            let r = c.canonical_root(z, None).unwrap();
            assert!((r * r - (d * d - 4.0)).norm() < 1e-7 * (1.0 + d.norm_sqr()), "{z}");
            let q = c.quotient_w(z, None).unwrap();
            assert!((q - dd / r).norm() < 1e-7 * (1.0 + q.norm()), "{z}");
        }
    }
}

#[test]
fn zero_potential_roots() {
    let c = ctx(&Potential::zero(), 8);
    for z in [C64::new(1.0, 0.2), C64::new(-5.0, -1.0)] {
        assert!((c.canonical_root(z, None).unwrap() - C64::new(0.0, -2.0) * z.sin()).norm() < 1e-10);
        assert!((c.quotient_w(z, None).unwrap() - C64::new(0.0, -1.0)).norm() < 1e-12);
    }
}

#[test]
fn sine_product_residuals() {
    let c0 = ctx(&Potential::zero(), 16);
    for z in [C64::new(0.3, 0.2), C64::new(9.5, 0.1), C64::new(3.0, 0.6)] {
        assert!(c0.sine_product_check(z).unwrap() < 1e-10);
    }
    // perturbation of the sine product, fading along the discs U_n
    let c = ctx(&Potential::cosines(&[(1, 0.2)]), 32);
    let r: Vec<f64> = [2i64, 4, 8, 16].iter().map(|&n| c.sine_product_check(C64::new(n as f64 * PI + 0.3, 0.2)).unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    assert!(c.sine_product_check(C64::new(0.3, 0.2)).unwrap() < 0.05);
}

#[test]
fn product_discriminant() {
    let phi = Potential::cosines(&[(1, 0.3), (3, 0.1)]);
    let c = ctx(&phi, 32);
    for z in [C64::new(0.5, 0.5), C64::new(-20.0, 0.2), C64::new(31.0, -1.0)] {
        let (d, _) = discriminant(&phi, z).unwrap();
        assert!((c.discriminant_product(z).unwrap() - d).norm() < 1e-6 * d.norm());
    }
}

#[test]
fn gap_points_need_side() {
    let phi = Potential::cosines(&[(1, 0.4)]);
    let c = ctx(&phi, 8);
    let t = c.sd.tau(1);
    assert!(c.canonical_root(t, None).is_err());
    let p = c.canonical_root(t, Some((1, Side::Plus))).unwrap();
    let m = c.canonical_root(t, Some((1, Side::Minus))).unwrap();
    assert!((p + m).norm() < 1e-9 * p.norm());
}
