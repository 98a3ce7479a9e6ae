use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use zsb::frequencies::freq_asymptotics_report;
use zsb::pipeline::Pipeline;
use zsb::potential::{hamiltonians, Potential};

#[test]
fn constant_potential_action() {
    let pl = Pipeline::new(&Potential::constant(0.3), 8, None, 1e-10).unwrap();
    let fr = pl.frequencies(1e-10).unwrap();
    let a = fr.action(0).unwrap();
    assert!((a.value - 0.09).norm() < 1e-10, "{}", a.value);
    assert!(a.discrepancy < 1e-10);
    assert!(fr.action(3).unwrap().value.norm() < 1e-12);
}

#[test]
fn actions_sum_to_h1() {
    let phi = Potential::cosines(&[(1, 0.2), (2, 0.1)]);
    let pl = Pipeline::new(&phi, 16, None, 1e-10).unwrap();
    let fr = pl.frequencies(1e-10).unwrap();
    let total: C64 = pl.sd.indices().map(|n| fr.action(n).unwrap().value).sum();
    assert!((total - hamiltonians(&phi).h1).norm() < 1e-9);
    // small gaps: I_n ≈ γ_n²/4
    let g = pl.sd.gamma(2).norm();
    assert!((4.0 * fr.action(2).unwrap().value.re / (g * g) - 1.0).abs() < 1e-2);
}

#[test]
fn zero_potential_frequencies() {
    let pl = Pipeline::new(&Potential::zero(), 8, None, 1e-10).unwrap();
    let fr = pl.frequencies(1e-10).unwrap();
    let ns: Vec<i64> = (-5..=5).collect();
    let fs = fr.frequency_spectrum(&ns).unwrap();
    for (n, w) in ns.iter().zip(&fs.omega_sharp) {
        assert!((w - (2.0 * PI * *n as f64).powi(3)).norm() < 1e-9);
    }
    for n in [-3i64, 2] {
        let psi = fr.solve_psi(n).unwrap();
        let z = C64::new(0.7, 0.4);
        assert!((fr.psi_over_root(&psi, z) - C64::new(0.0, 1.0) / (n as f64 * PI - z)).norm() < 1e-12);
    }
}

#[test]
fn moments_and_symmetry_on_er() {
    let phi = Potential::cosines(&[(1, 0.2), (2, 0.1)]);
    let pl = Pipeline::new(&phi, 16, None, 1e-10).unwrap();
    let fr = pl.frequencies(1e-10).unwrap();
    let ns: Vec<i64> = (-6..=6).collect();
    let fs = fr.frequency_spectrum(&ns).unwrap();
    assert!(fs.m0_defect < 1e-10 && fs.odd_defect < 1e-10 && fs.psi_residual < 1e-10);
    for i in 0..ns.len() {
        let j = ns.len() - 1 - i;
        assert!((fs.omega_star[i] + fs.omega_star[j]).norm() < 1e-10);
    }
    let omega = fs.omega.as_ref().expect("E_r frequencies");
    for (i, &n) in ns.iter().enumerate() {
        let nf = n as f64;
        let want = fs.omega_star[i] + (2.0 * PI * nf).powi(3) + 12.0 * nf * PI * fs.h1 + 6.0 * fs.h2;
        assert!((omega[i] - want).norm() < 1e-9 * want.norm().max(1.0));
    }
    let rep = freq_asymptotics_report(&fs);
    assert_eq!(rep.len(), 12);
}

#[test]
fn collapsed_moments_vanish() {
    let phi = Potential::cosines(&[(1, 0.2)]);
    let pl = Pipeline::new(&phi, 8, None, 1e-10).unwrap();
    let fr = pl.frequencies(1e-10).unwrap();
    let psi = fr.solve_psi(1).unwrap();
    assert_eq!(fr.moment(&psi, 5, 2).unwrap(), C64::new(0.0, 0.0));
    assert!(fr.moment(&psi, 1, 4).is_err());
    assert!(fr.solve_psi(40).is_err());
}
