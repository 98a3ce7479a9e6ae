//! Gauss–Legendre rules and small quadrature helpers.

use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights.
pub type Rule = (Vec<f64>, Vec<f64>);

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("gl cache").get(&n) {
        return r.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    let r = Arc::new((x, w));
    cache.lock().expect("gl cache").insert(n, r.clone());
    r
}

/// `∫_a^b f(s) ds` by composite Gauss–Legendre on the given breakpoints.
pub fn integrate_panels<F: FnMut(f64) -> C64>(breaks: &[f64], order: usize, mut f: F) -> C64 {
    let gl = gauss_legendre(order);
    let mut acc = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
        for (x, wt) in gl.0.iter().zip(&gl.1) {
            acc += f(m + h * x) * (wt * h);
        }
    }
    acc
}

/// Uniform breakpoints on `[a, b]` with panels no longer than `max_len`.
pub fn uniform_breaks(a: f64, b: f64, max_len: f64) -> Vec<f64> {
    let k = (((b - a).abs() / max_len).ceil() as usize).max(1);
    (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
}

/// Breakpoints on `[0, 1]` graded geometrically toward 0.
pub fn graded_breaks(levels: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..levels).map(|i| 0.25f64.powi((levels - i) as i32)).collect();
    v.insert(0, 0.0);
    v.push(0.5);
    v.push(1.0);
    v
}
