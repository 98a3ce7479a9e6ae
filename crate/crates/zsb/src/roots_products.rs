//! Standard roots `w_n`, the canonical root `√c(Δ² − 4)` as a tail-corrected
//! infinite product, the quotient `Δ̇/√c`, and the analytic factors `χ_k`,
//! `ζ_k`.
//!
//! Gap factors with `|m| ≤ N` come from the located spectrum. For
//! `N < |m| ≤ M` the gap is closed and sits at the large-`|m|` position of
//! [`asymptotic_tau`]. Beyond `M` the product is the sine tail
//! `Π_{m>M}(1 − λ²/m²π²)`, summed through Hurwitz zeta values, times the
//! first-order shift `exp(H₁ Σ_{m>M} 1/(m²π² − λ²))`.

use crate::error::{Result, ZsbError};
use crate::spectrum::{asymptotic_tau, SpectralData};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Parameters of an open gap.
#[derive(Clone, Copy, Debug)]
pub struct OpenGap {
    pub n: i64,
    pub tau: C64,
    pub gamma: C64,
    pub lam_dot: C64,
}

#[derive(Clone, Debug)]
pub struct RootContext {
    pub sd: Arc<SpectralData>,
    /// Product truncation `M ≥ N`.
    pub tail_index: i64,
    pub open: Vec<OpenGap>,
    /// `±1` applied to the raw product; fixed on `(λ₀⁺, λ₁⁻)` for real type.
    pub sign: f64,
    /// Value `i·√c` at the anchor point used to fix the sign (real type).
    pub sign_anchor: Option<(f64, C64)>,
    tail_tau: Vec<C64>,
}

#[inline]
fn pi_m(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else {
        m as f64 * PI
    }
}

/// Principal-branch standard root for the gap `(τ, γ)`.
#[inline]
pub fn w_principal(tau: C64, gamma: C64, lambda: C64) -> C64 {
    let d = tau - lambda;
    if gamma == C64::new(0.0, 0.0) {
        return d;
    }
    d * (1.0 - gamma * gamma / (4.0 * d * d)).sqrt()
}

/// Boundary value `∓i(γ/2)√(1 − t²)` on the side `G^±` at `λ = τ + tγ/2`.
#[inline]
pub fn w_side(tau: C64, gamma: C64, lambda: C64, side: Side) -> C64 {
    let t = 2.0 * (lambda - tau) / gamma;
    let v = C64::new(0.0, 1.0) * gamma / 2.0 * (1.0 - t * t).sqrt();
    match side {
        Side::Plus => -v,
        Side::Minus => v,
    }
}

/// Gap parameter `t` if `λ` lies on the segment `G = τ + [−1, 1]γ/2`.
pub fn gap_parameter(tau: C64, gamma: C64, lambda: C64) -> Option<f64> {
    if gamma == C64::new(0.0, 0.0) {
        return None;
    }
    let tol = 8.0 * f64::EPSILON * (1.0 + lambda.norm());
    if (lambda - tau - gamma / 2.0).norm() <= tol || (lambda - tau + gamma / 2.0).norm() <= tol {
        return None;
    }
    let t = 2.0 * (lambda - tau) / gamma;
    if t.im.abs() <= 1e-12 * (1.0 + t.re.abs()) && t.re.abs() < 1.0 {
        Some(t.re)
    } else {
        None
    }
}

/// Hurwitz zeta `ζ(s, a) = Σ_{j≥0} (a + j)^{−s}` for integer `s ≥ 2`, `a ≥ 1`.
pub fn hurwitz_zeta(s: u32, a: f64) -> f64 {
    // Bernoulli numbers B_2..B_20
    const B: [f64; 10] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
    ];
    let sf = s as f64;
    let n0 = (sf + 20.0).max(a).ceil();
    let j = (n0 - a).max(0.0) as usize;
    let mut sum = 0.0;
    for i in 0..j {
        sum += (a + i as f64).powi(-(s as i32));
    }
    let n = a + j as f64;
    sum += n.powf(1.0 - sf) / (sf - 1.0) + 0.5 * n.powf(-sf);
    // Euler–Maclaurin corrections B_{2k}/(2k)! (s)_{2k−1} n^{−s−2k+1}
    let mut rising = sf; // (s)_{1}
    let mut fact = 2.0; // (2k)!
    let mut pw = n.powf(-sf - 1.0);
    for (k, b) in B.iter().enumerate() {
        let term = b / fact * rising * pw;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let k2 = 2.0 * (k as f64 + 1.0);
        rising *= (sf + k2 - 1.0) * (sf + k2);
        fact *= (k2 + 1.0) * (k2 + 2.0);
        pw /= n * n;
    }
    sum
}

/// `Σ_{m>K} log(1 − (λ/(pm))²)` and `Σ_{m>K} 1/((pm)² − λ²)` for `|λ| < p(K+1)`.
pub fn sine_tail(lambda: C64, p: f64, k: i64) -> (C64, C64) {
    let a = (k + 1) as f64;
    let x = lambda * lambda / (p * p);
    let mut log_sum = C64::new(0.0, 0.0);
    let mut inv_sum = C64::new(0.0, 0.0);
    let mut xk = C64::new(1.0, 0.0); // x^{j−1}
    for j in 1..80u32 {
        let z = hurwitz_zeta(2 * j, a);
        inv_sum += xk * z / (p * p);
        xk *= x;
        let t = xk * z / j as f64;
        log_sum -= t;
        if t.norm() < 1e-18 * (1.0 + log_sum.norm()) && j > 2 {
            break;
        }
    }
    (log_sum, inv_sum)
}

impl RootContext {
    pub fn new(sd: Arc<SpectralData>, tail_index: usize) -> Result<Self> {
        let m = tail_index as i64;
        if m < sd.n_max {
            return Err(ZsbError::Input(format!("tail index M = {m} must be at least the window N = {}", sd.n_max)));
        }
        let open = sd
            .open_gaps()
            .into_iter()
            .map(|n| OpenGap { n, tau: sd.tau(n), gamma: sd.gamma(n), lam_dot: sd.lam_dot(n) })
            .collect();
        let tail_tau = ((sd.n_max + 1)..=m).map(|j| asymptotic_tau(&sd.hamiltonians, j)).collect::<Vec<_>>();
        let tail_tau_neg: Vec<C64> = ((sd.n_max + 1)..=m).map(|j| asymptotic_tau(&sd.hamiltonians, -j)).collect();
        let mut tt = tail_tau;
        tt.extend(tail_tau_neg);
        let mut ctx = RootContext { sd, tail_index: m, open, sign: 1.0, sign_anchor: None, tail_tau: tt };
        if ctx.sd.real_type && ctx.sd.n_max >= 1 {
            let x = (ctx.sd.lam_plus(0).re + ctx.sd.lam_minus(1).re) / 2.0;
            let v = C64::new(0.0, 1.0) * ctx.canonical_root(C64::new(x, 0.0), None)?;
            if v.re < 0.0 {
                ctx.sign = -1.0;
            }
            ctx.sign_anchor = Some((x, v * ctx.sign));
        }
        Ok(ctx)
    }

    /// Default tail index for a window `N`.
    pub fn default_tail(n_max: usize) -> usize {
        (4 * n_max).max(64)
    }

    fn tail_tau(&self, m: i64) -> C64 {
        let n = self.sd.n_max;
        let k = (self.tail_index - n) as usize;
        if m > 0 {
            self.tail_tau[(m - n - 1) as usize]
        } else {
            self.tail_tau[k + (-m - n - 1) as usize]
        }
    }

    fn check_lambda(&self, lambda: C64) -> Result<()> {
        if lambda.norm() > 0.5 * PI * (self.tail_index + 1) as f64 {
            return Err(ZsbError::Accuracy(format!(
                "|lambda| = {:.3} too large for tail index M = {} (need |lambda| <= (M+1)pi/2)",
                lambda.norm(),
                self.tail_index
            )));
        }
        Ok(())
    }

    /// `w_n(λ)`; `side` must be given when `λ` lies on the open gap `G_n`.
    pub fn standard_root(&self, n: i64, lambda: C64, side: Option<Side>) -> Result<C64> {
        let (tau, gamma) = if self.sd.in_window(n) {
            (self.sd.tau(n), self.sd.gamma(n))
        } else if n.abs() <= self.tail_index {
            (self.tail_tau(n), C64::new(0.0, 0.0))
        } else {
            (asymptotic_tau(&self.sd.hamiltonians, n), C64::new(0.0, 0.0))
        };
        match (gap_parameter(tau, gamma, lambda), side) {
            (Some(_), Some(s)) => Ok(w_side(tau, gamma, lambda, s)),
            (Some(t), None) => Err(ZsbError::Domain(format!("lambda = {lambda} lies inside the open gap G_{n} (t = {t:.6}) without a side tag"))),
            (None, _) => Ok(w_principal(tau, gamma, lambda)),
        }
    }

    /// Standard root of an open gap, honoring a side tag for that gap.
    #[inline]
    fn w_open(&self, g: &OpenGap, lambda: C64, side: Option<(i64, Side)>) -> C64 {
        match side {
            Some((n, s)) if n == g.n => w_side(g.tau, g.gamma, lambda, s),
            _ => w_principal(g.tau, g.gamma, lambda),
        }
    }

    fn check_off_gaps(&self, lambda: C64, side: Option<(i64, Side)>) -> Result<()> {
        for g in &self.open {
            if let Some(t) = gap_parameter(g.tau, g.gamma, lambda) {
                if side.map(|s| s.0) != Some(g.n) {
                    return Err(ZsbError::Domain(format!("lambda = {lambda} lies inside the open gap G_{} (t = {t:.6}) without a side tag", g.n)));
                }
            }
        }
        Ok(())
    }

    /// `Π_{|m|≤M, m≠excl} w_m(λ)/π_m` times the tail beyond `M`.
    fn root_product(&self, lambda: C64, side: Option<(i64, Side)>, exclude: Option<i64>) -> Result<C64> {
        self.check_lambda(lambda)?;
        self.check_off_gaps(lambda, side)?;
        let n = self.sd.n_max;
        let mut prod = C64::new(1.0, 0.0);
        for m in -self.tail_index..=self.tail_index {
            if Some(m) == exclude {
                continue;
            }
            let w = if m.abs() <= n {
                let (tau, gamma) = (self.sd.tau(m), self.sd.gamma(m));
                match side {
                    Some((k, s)) if k == m && gamma != C64::new(0.0, 0.0) => w_side(tau, gamma, lambda, s),
                    _ => w_principal(tau, gamma, lambda),
                }
            } else {
                self.tail_tau(m) - lambda
            };
            prod *= w / pi_m(m);
        }
        let (log_tail, inv_tail) = sine_tail(lambda, PI, self.tail_index);
        let h1 = self.sd.hamiltonians.h1;
        Ok(prod * (log_tail + h1 * inv_tail).exp())
    }

    /// `√c(Δ² − 4) = 2i Π_m w_m(λ)/π_m`; `side = (n, ±)` for points on `G_n`.
    pub fn canonical_root(&self, lambda: C64, side: Option<(i64, Side)>) -> Result<C64> {
        Ok(C64::new(0.0, 2.0 * self.sign) * self.root_product(lambda, side, None)?)
    }

    /// `Δ̇/√c = −i Π_{open m}(λ_m^• − λ)/w_m(λ)`; collapsed factors are 1.
    pub fn quotient_w(&self, lambda: C64, side: Option<(i64, Side)>) -> Result<C64> {
        self.check_off_gaps(lambda, side)?;
        Ok(self.quotient_unchecked(lambda, side))
    }

    #[inline]
    pub fn quotient_unchecked(&self, lambda: C64, side: Option<(i64, Side)>) -> C64 {
        let mut p = C64::new(0.0, -self.sign);
        for g in &self.open {
            p *= (g.lam_dot - lambda) / self.w_open(g, lambda, side);
        }
        p
    }

    /// `χ_k(λ) = Π_{m≠k}(λ_m^• − λ)/w_m(λ)`.
    pub fn chi_factor(&self, k: i64, lambda: C64) -> C64 {
        let mut p = C64::new(1.0, 0.0);
        for g in self.open.iter().filter(|g| g.n != k) {
            p *= (g.lam_dot - lambda) / w_principal(g.tau, g.gamma, lambda);
        }
        p
    }

    /// `ζ_k(λ) = Π_{m≠k}(σ_m − λ)/w_m(λ)` with `sigma[i]` paired with `open[i]`.
    pub fn zeta_factor(&self, k: i64, lambda: C64, sigma: &[C64]) -> C64 {
        let mut p = C64::new(1.0, 0.0);
        for (g, &s) in self.open.iter().zip(sigma) {
            if g.n != k {
                p *= (s - lambda) / w_principal(g.tau, g.gamma, lambda);
            }
        }
        p
    }

    /// `|sin λ/(λ − nπ) · ((1/π_n) Π_{m≠n} w_m(λ)/π_m)⁻¹ − 1|` for the disc
    /// `U_n` containing `λ`.
    pub fn sine_product_check(&self, lambda: C64) -> Result<f64> {
        let n = (lambda.re / PI).round() as i64;
        let p = self.root_product(lambda, None, Some(n))? / pi_m(n);
        let d = lambda - n as f64 * PI;
        let s = if d.norm() < 1e-8 {
            // sin λ/(λ − nπ) = (−1)^n sin(d)/d
            let sg = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sg * (1.0 - d * d / 6.0 + d * d * d * d / 120.0)
        } else {
            lambda.sin() / d
        };
        Ok((s / p - 1.0).norm())
    }

    /// `Δ(λ) = 2 − Π_m (λ_{2m}^+ − λ)(λ_{2m}^− − λ)/π_{2m}²`.
    pub fn discriminant_product(&self, lambda: C64) -> Result<C64> {
        self.check_lambda(lambda)?;
        let n = self.sd.n_max;
        let mut prod = C64::new(1.0, 0.0);
        let k_max = self.tail_index / 2;
        for k in -k_max..=k_max {
            let m = 2 * k;
            let f = if m.abs() <= n {
                (self.sd.lam_plus(m) - lambda) * (self.sd.lam_minus(m) - lambda)
            } else {
                let t = self.tail_tau(m) - lambda;
                t * t
            };
            prod *= f / (pi_m(m) * pi_m(m));
        }
        let (log_tail, inv_tail) = sine_tail(lambda, 2.0 * PI, k_max);
        let h1 = self.sd.hamiltonians.h1;
        Ok(2.0 - prod * (2.0 * (log_tail + h1 * inv_tail)).exp())
    }
}
