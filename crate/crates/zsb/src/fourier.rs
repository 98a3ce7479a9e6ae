//! Grid synthesis and analysis for period-1 trigonometric polynomials.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::collections::BTreeMap;

/// Values of `Σ c_n e^{2πin(x_j + shift)}` on the grid `x_j = j/g`.
///
/// Modes with `|n| ≥ g/2` alias; callers size `g` accordingly.
pub fn synth(coeffs: &BTreeMap<i64, C64>, g: usize, shift: f64) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); g];
    for (&n, &c) in coeffs {
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * shift);
        buf[n.rem_euclid(g as i64) as usize] += c * phase;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(g).process(&mut buf);
    buf
}

/// Fourier coefficients `ĉ_k = (1/g) Σ_j f_j e^{−2πikj/g}` in FFT order.
pub fn analyze(values: &[C64]) -> Vec<C64> {
    let g = values.len();
    let mut buf = values.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(g).process(&mut buf);
    let s = 1.0 / g as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Signed wavenumber of FFT slot `k` on a grid of size `g`.
pub fn wavenumber(k: usize, g: usize) -> i64 {
    if k <= g / 2 {
        k as i64
    } else {
        k as i64 - g as i64
    }
}

/// Smallest power of two `≥ n`.
pub fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
