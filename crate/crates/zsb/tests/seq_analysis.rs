use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use zsb::seq_analysis::{decay_exponent, hilbert, modified_transform, RunConfig, Seq};
use zsb::ZsbError;

fn real(n: i64, f: impl Fn(i64) -> f64) -> Seq {
    Seq::from_fn(n, |k| C64::new(f(k), 0.0))
}

#[test]
fn hilbert_of_delta() {
    let x = real(5, |k| if k == 0 { 1.0 } else { 0.0 });
    let h = hilbert(&x);
    for n in -5..=5i64 {
        let want = if n == 0 { 0.0 } else { -1.0 / n as f64 };
        assert!((h.get(n).re - want).abs() < 1e-15);
    }
}

#[test]
fn modified_reduces_to_hilbert() {
    let x = real(6, |k| 1.0 / (1.0 + (k * k) as f64));
    let nodes = real(6, |k| k as f64);
    let a = modified_transform(&x, &nodes, &nodes, 1.0).unwrap();
    let h = hilbert(&x);
    for n in -6..=6 {
        assert!((a.get(n) - std::f64::consts::PI * h.get(n)).norm() < 1e-14);
    }
}

#[test]
fn modified_rejects_crowded_nodes() {
    let x = real(3, |_| 1.0);
    let rho = real(3, |k| if k == 2 { 0.05 } else { k as f64 });
    let sigma = real(3, |k| k as f64);
    match modified_transform(&x, &rho, &sigma, 2.0) {
        Err(ZsbError::Domain(m)) => assert!(m.contains("rho_2 - sigma_"), "{m}"),
        other => panic!("expected a domain error, got {other:?}"),
    }
}

#[test]
fn decay_fits() {
    let pw: BTreeMap<i64, f64> = (1..=64).map(|n| (n, 3.0 * (n as f64).powf(-2.5))).collect();
    let f = decay_exponent(&pw, 64).unwrap();
    assert!((f.exponent - 2.5).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-10);
    assert!(!f.super_polynomial);
    let ex: BTreeMap<i64, f64> = (1..=64).map(|n| (n, (-0.8 * n as f64).exp())).collect();
    assert!(decay_exponent(&ex, 64).unwrap().super_polynomial);
    let sparse: BTreeMap<i64, f64> = [(20, 1.0), (30, 0.0)].into_iter().collect();
    assert!(decay_exponent(&sparse, 32).is_err());
}

#[test]
fn run_config_formats() {
    let a = RunConfig::parse("# desk run\nN = 16\nM = 64\ntol = 1e-9\ngrid = 512\n").unwrap();
    let b = RunConfig::parse(r#"{"N": 16, "M": 64, "tol": 1e-9, "grid": 512}"#).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.dt, RunConfig::default().dt);
    for (text, line) in [("N = 8\nbogus\n", 2), ("\n\ntol = x", 3), ("N = 4\nzap = 1", 2), ("{\n\"N\": 4,\n\"zap\": 1}", 3)] {
        match RunConfig::parse(text) {
            Err(ZsbError::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("expected a config error for {text:?}, got {other:?}"),
        }
    }
    assert!(RunConfig::parse("grid = 100").is_err());
    assert!(RunConfig::parse("N = 8\nM = 4").is_err());
    assert!(RunConfig::parse("tol = -1").is_err());
}

fn seq() -> impl Strategy<Value = Seq> {
    prop::collection::vec(-1.0f64..1.0, 13).prop_map(|v| Seq::new(6, v.into_iter().map(|x| C64::new(x, 0.0)).collect()).unwrap())
}

proptest! {
    #[test]
    fn hilbert_is_skew(x in seq(), y in seq()) {
        let dot = |a: &Seq, b: &Seq| a.indices().map(|n| a.get(n) * b.get(n)).sum::<C64>();
        prop_assert!((dot(&hilbert(&x), &y) + dot(&x, &hilbert(&y))).norm() < 1e-12);
    }

    #[test]
    fn hilbert_is_bounded(x in seq()) {
        // ‖H‖ ≤ π on ℓ²
        prop_assert!(hilbert(&x).h_norm(0.0) <= std::f64::consts::PI * x.h_norm(0.0) + 1e-12);
    }
}
