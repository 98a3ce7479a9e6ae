use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use zsb::potential::{fl_norm, hamiltonians, Potential};

fn single(n: i64, c: f64) -> Potential {
    Potential::real_type([(n, C64::new(c, 0.0))].into_iter().collect())
}

#[test]
fn fl_norm_examples() {
    assert!((fl_norm(&single(1, 0.5), 2.0).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(fl_norm(&Potential::zero(), 3.0).unwrap(), 0.0);
    assert!(fl_norm(&single(1, 0.5), 0.5).is_err());
}

#[test]
fn fl_norm_p2_diverges_p4_converges() {
    let fam = |k: i64, p: f64| {
        let m: BTreeMap<i64, C64> =
            (1..=k).flat_map(|n| [(n, C64::new((n as f64).powf(-0.3), 0.0)), (-n, C64::new((n as f64).powf(-0.3), 0.0))]).collect();
        fl_norm(&Potential::real_u(m).unwrap(), p).unwrap()
    };
    let direct4 = |k: i64| (2.0 * (1..=k).map(|n| (n as f64).powf(-1.2)).sum::<f64>()).powf(0.25);
    assert!((fam(64, 4.0) - direct4(64)).abs() < 1e-12);
    assert!(fam(1024, 2.0) > 1.6 * fam(64, 2.0));
    assert!(fam(1024, 4.0) < 1.1 * fam(64, 4.0));
}

#[test]
fn predicates() {
    let u = Potential::cosines(&[(1, 0.2), (2, 0.1)]);
    assert!(u.is_er() && u.is_real_type());
    let v = Potential::real_type([(1, C64::new(0.1, 0.2))].into_iter().collect());
    assert!(v.is_real_type() && !v.is_er());
    let w = Potential::new([(1, C64::new(0.1, 0.0))].into_iter().collect(), BTreeMap::new());
    assert!(!w.is_real_type());
    let bad: BTreeMap<i64, C64> = [(1, C64::new(0.1, 0.0)), (-1, C64::new(0.2, 0.0))].into_iter().collect();
    assert!(Potential::real_u(bad).is_err());
}

#[test]
fn constant_hamiltonians() {
    let h = hamiltonians(&Potential::constant(0.3));
    assert!((h.h1 - 0.09).norm() < 1e-15);
    assert!(h.h2.norm() < 1e-15);
    assert!((h.h3 - 0.3f64.powi(4)).norm() < 1e-15);
}

#[test]
fn json_round_trip_and_errors() {
    let p = Potential::from_json_str(r#"{"kind":"real_u","coeffs":[[-1,0.1,0],[1,0.1,0]]}"#).unwrap();
    assert!(p.is_er());
    let back = Potential::from_json_str(&p.to_json_string()).unwrap();
    assert_eq!(p, back);
    let q = Potential::from_json_str(r#"{"kind":"pair","coeffs":[[2,0.1,0.05]]}"#).unwrap();
    assert!(q.is_real_type());
    assert!((q.plus(-2) - C64::new(0.1, -0.05)).norm() < 1e-16);
    assert!(Potential::from_json_str(r#"{"kind":"other","coeffs":[]}"#).is_err());
    assert!(Potential::from_json_str(r#"{"kind":"pair","coeffs":[[0.5,1,0]]}"#).is_err());
}

fn coeffs() -> impl Strategy<Value = BTreeMap<i64, C64>> {
    prop::collection::btree_map(-4i64..=4, (-0.2f64..0.2, -0.2f64..0.2).prop_map(|(a, b)| C64::new(a, b)), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_type_hamiltonians_are_real(v in coeffs()) {
        let h = hamiltonians(&Potential::real_type(v));
        prop_assert!(h.h1.re >= 0.0);
        for x in h.as_array() {
            prop_assert!(x.im.abs() < 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn er_has_vanishing_h2(v in coeffs()) {
        let mut u = BTreeMap::new();
        for (n, c) in v {
            if n == 0 {
                u.insert(0, C64::new(c.re, 0.0));
            } else {
                u.insert(n, c);
                u.insert(-n, c.conj());
            }
        }
        let h = hamiltonians(&Potential::real_u(u).unwrap());
        prop_assert!(h.h2.norm() < 1e-13);
    }

    #[test]
    fn fl_norm_decreases_in_p(v in coeffs(), p in 1.0f64..6.0) {
        let phi = Potential::real_type(v);
        prop_assert!(fl_norm(&phi, p + 1.0).unwrap() <= fl_norm(&phi, p).unwrap() * (1.0 + 1e-12));
    }
}
