//! Localization of the periodic spectrum `λ_n^±` in isolating discs, gap data
//! `τ_n`, `γ_n`, and the critical points `λ_n^•` of `Δ`.
//!
//! Root finding works with `D(λ) = (m₁₁ − m₂₂)² + 4m₁₂m₂₁`, which equals
//! `Δ² − 4` because `det M = 1` but avoids the cancellation in `Δ ∓ 2` near
//! (nearly) double eigenvalues.

use crate::error::{Result, ZsbError};
use crate::potential::{hamiltonians, HamiltonianValues, Potential};
use crate::zs_core::{lex_cmp, TransferResult, ZsSolver, COARSE_STEPS_PER_UNIT};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Default disc radius of `D_n`.
pub const DISC_RADIUS: f64 = PI / 5.0;
const GROWN_RADII: [f64; 3] = [PI / 4.0, PI / 3.0, 0.45 * PI];
const NEWTON_MAX: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralData {
    /// Window half-width: indices `−N..=N`.
    pub n_max: i64,
    pub tol: f64,
    pub lam_minus: Vec<C64>,
    pub lam_plus: Vec<C64>,
    pub tau: Vec<C64>,
    pub gamma: Vec<C64>,
    pub lam_dot: Vec<C64>,
    pub disc_center: Vec<C64>,
    pub disc_radius: Vec<f64>,
    /// Argument-principle zero count of `Δ² − 4` on each disc.
    pub winding: Vec<i64>,
    /// Isolation constant of `c⁻¹|m−n| ≤ dist(U_n, U_m) ≤ c|m−n|`.
    pub iso_constant: f64,
    /// All `|n| ≥ n_phi` use the default disc `D_n`.
    pub n_phi: i64,
    pub real_type: bool,
    /// `φ = (u, u)` with `u` real.
    pub er: bool,
    pub hamiltonians: HamiltonianValues,
}

impl SpectralData {
    pub fn idx(&self, n: i64) -> usize {
        debug_assert!(n.abs() <= self.n_max, "index {n} outside window {}", self.n_max);
        (n + self.n_max) as usize
    }

    pub fn in_window(&self, n: i64) -> bool {
        n.abs() <= self.n_max
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        -self.n_max..=self.n_max
    }

    pub fn lam_minus(&self, n: i64) -> C64 {
        self.lam_minus[self.idx(n)]
    }
    pub fn lam_plus(&self, n: i64) -> C64 {
        self.lam_plus[self.idx(n)]
    }
    pub fn tau(&self, n: i64) -> C64 {
        self.tau[self.idx(n)]
    }
    pub fn gamma(&self, n: i64) -> C64 {
        self.gamma[self.idx(n)]
    }
    pub fn lam_dot(&self, n: i64) -> C64 {
        self.lam_dot[self.idx(n)]
    }

    pub fn is_open(&self, n: i64) -> bool {
        self.in_window(n) && self.gamma(n) != C64::new(0.0, 0.0)
    }

    pub fn open_gaps(&self) -> Vec<i64> {
        self.indices().filter(|&n| self.is_open(n)).collect()
    }

    /// Midpoint `τ_m`; outside the window the large-`|m|` model of
    /// [`asymptotic_tau`] is used (those gaps are treated as collapsed).
    pub fn tau_any(&self, m: i64) -> C64 {
        if self.in_window(m) {
            self.tau(m)
        } else {
            asymptotic_tau(&self.hamiltonians, m)
        }
    }
}

/// Closed-gap position for large `|m|`: the root of
/// `θ(λ) = λ − Σ_{j≤4} H_j/(2λ)^j = mπ` near `mπ`, i.e. the quasi-momentum
/// of the Laurent expansion of `F` set to `mπ`.
pub fn asymptotic_tau(h: &HamiltonianValues, m: i64) -> C64 {
    let hs = h.as_array();
    let target = C64::new(m as f64 * PI, 0.0);
    if m == 0 {
        return C64::new(0.0, 0.0);
    }
    let mut l = target;
    for _ in 0..8 {
        let mut th = l;
        let mut dth = C64::new(1.0, 0.0);
        let inv = 1.0 / (2.0 * l);
        let mut p = inv;
        for (j, hj) in hs.iter().enumerate() {
            th -= hj * p;
            // d/dλ (2λ)^{-j} = −j (2λ)^{-j} / λ
            dth += hj * p * (j as f64 + 1.0) / l;
            p *= inv;
        }
        let step = (th - target) / dth;
        l -= step;
        if step.norm() < 1e-16 * l.norm() {
            break;
        }
    }
    l
}

/// `D = Δ² − 4` and `D'` from the transfer matrix.
fn d_of(r: &TransferResult) -> (C64, C64) {
    let a = r.m11 - r.m22;
    let da = r.dm11 - r.dm22;
    (a * a + 4.0 * r.m12 * r.m21, 2.0 * a * da + 4.0 * (r.dm12 * r.m21 + r.m12 * r.dm21))
}

/// Zero count of `Δ² − 4` inside `|λ − c| = r` by the trapezoidal argument
/// principle; the node count doubles until the count is near an integer.
pub fn winding_count(solver: &ZsSolver, c: C64, r: f64) -> Result<f64> {
    let mut q = 16usize;
    loop {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..q {
            let e = C64::from_polar(r, 2.0 * PI * j as f64 / q as f64);
            let (d, dd) = d_of(&solver.transfer(c + e)?);
            acc += dd / d * e;
        }
        let w = acc.re / q as f64;
        if (w - w.round()).abs() < 0.05 && acc.im.abs() / (q as f64) < 0.05 {
            return Ok(w);
        }
        if q >= 256 {
            return Ok(w);
        }
        q *= 2;
    }
}

struct Disc {
    lam_minus: C64,
    lam_plus: C64,
    lam_dot: C64,
    radius: f64,
    winding: i64,
}

fn snap(z: C64, real: bool) -> C64 {
    if real {
        C64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Secant iteration for a zero of `Δ̇` starting near `x0`.
fn find_lam_dot(solver: &ZsSolver, n: i64, x0: C64, center: C64, radius: f64, real: bool) -> Result<C64> {
    let f = |x: C64| -> Result<C64> { Ok(solver.transfer(x)?.ddelta()) };
    let mut a = snap(x0, real);
    let mut b = a + 1e-3;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    for _ in 0..NEWTON_MAX {
        if fb == fa {
            break;
        }
        let step = fb * (b - a) / (fb - fa);
        let mut c = snap(b - step, real);
        if (c - center).norm() > radius {
            // keep the iterate inside the disc
            c = center + (c - center) * (0.5 * radius / (c - center).norm());
        }
        a = b;
        fa = fb;
        b = c;
        fb = f(b)?;
        if step.norm() <= 1e-15 * (1.0 + b.norm()) || fb.norm() == 0.0 {
            return Ok(b);
        }
    }
    let res = fb.norm();
    if res < 1e-9 {
        Ok(b)
    } else {
        Err(ZsbError::Newton { context: format!("zero of the derivative of the discriminant in disc {n}"), residual: res })
    }
}

/// Newton on `D = Δ² − 4` from `x0`.
fn newton_d(solver: &ZsSolver, n: i64, x0: C64, real: bool) -> Result<C64> {
    let mut x = snap(x0, real);
    let mut res = f64::INFINITY;
    for _ in 0..NEWTON_MAX {
        let (d, dd) = d_of(&solver.transfer(x)?);
        res = d.norm();
        if d.norm() == 0.0 {
            return Ok(x);
        }
        let step = d / dd;
        x = snap(x - step, real);
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    if res < 1e-12 {
        Ok(x)
    } else {
        Err(ZsbError::Newton { context: format!("periodic eigenvalue in disc {n}"), residual: res })
    }
}

fn locate_disc(solver: &ZsSolver, coarse: &ZsSolver, n: i64, tol: f64, h1: C64, real: bool) -> Result<Disc> {
    let center = C64::new(n as f64 * PI, 0.0);
    let mut radius = DISC_RADIUS;
    let mut wind = winding_count(coarse, center, radius)?;
    if wind.round() as i64 != 2 {
        for &r in GROWN_RADII.iter() {
            radius = r;
            wind = winding_count(coarse, center, radius)?;
            if wind.round() as i64 == 2 {
                break;
            }
        }
    }
    if wind.round() as i64 != 2 {
        return Err(ZsbError::Localization { n, reason: format!("winding count {wind:.3} != 2 in disc of radius {radius:.3}") });
    }

    let guess = if n == 0 { C64::new(0.0, 0.0) } else { center + h1 / (2.0 * center) };
    let lam_dot = find_lam_dot(solver, n, guess, center, radius, real)?;

    // quadratic model of Δ − s around λ•: δ² = −D(λ•)/(s·Δ̈)
    let s = if n.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
    let r0 = solver.transfer(lam_dot)?;
    let (d0, _) = d_of(&r0);
    let hstep = 1e-4;
    let ddd = (solver.transfer(lam_dot + hstep)?.ddelta() - solver.transfer(lam_dot - hstep)?.ddelta()) / (2.0 * hstep);
    let delta2 = -d0 / (s * ddd);
    let delta = delta2.sqrt();
    if real && delta2.re <= 0.0 && delta2.norm() < (10.0 * tol).powi(2) {
        return Ok(Disc { lam_minus: lam_dot, lam_plus: lam_dot, lam_dot, radius, winding: 2 });
    }
    if 2.0 * delta.norm() < 10.0 * tol {
        return Ok(Disc { lam_minus: lam_dot, lam_plus: lam_dot, lam_dot, radius, winding: 2 });
    }
    let a = newton_d(solver, n, lam_dot - delta, real)?;
    let b = newton_d(solver, n, lam_dot + delta, real)?;
    if (a - b).norm() < 0.25 * delta.norm() {
        return Err(ZsbError::Localization { n, reason: "both Newton seeds converged to the same eigenvalue".into() });
    }
    let (lm, lp) = if lex_cmp(&a, &b, 1e-13).is_le() { (a, b) } else { (b, a) };
    if (lp - lm).norm() < 10.0 * tol {
        let t = lam_dot;
        return Ok(Disc { lam_minus: t, lam_plus: t, lam_dot: t, radius, winding: 2 });
    }
    for (name, z) in [("lambda-", lm), ("lambda+", lp), ("lambda-dot", lam_dot)] {
        if (z - center).norm() >= radius {
            return Err(ZsbError::Localization { n, reason: format!("{name} = {z} left the isolating disc") });
        }
    }
    Ok(Disc { lam_minus: lm, lam_plus: lp, lam_dot, radius, winding: wind.round() as i64 })
}

/// Locate `λ_n^±` and `λ_n^•` for `|n| ≤ N`.
pub fn locate_spectrum(phi: &Potential, n_max: usize, tol: f64) -> Result<SpectralData> {
    locate_spectrum_with(&ZsSolver::new(phi), n_max, tol)
}

pub fn locate_spectrum_with(solver: &ZsSolver, n_max: usize, tol: f64) -> Result<SpectralData> {
    if !(tol > 0.0) {
        return Err(ZsbError::Input(format!("tol must be positive, got {tol}")));
    }
    let phi = solver.potential();
    let real = phi.is_real_type();
    let h = hamiltonians(phi);
    let coarse = solver.at_resolution(COARSE_STEPS_PER_UNIT);
    let nm = n_max as i64;
    let discs: Vec<Disc> = (-nm..=nm)
        .into_par_iter()
        .map(|n| locate_disc(solver, &coarse, n, tol, h.h1, real))
        .collect::<Result<_>>()?;

    let mut sd = SpectralData {
        n_max: nm,
        tol,
        lam_minus: discs.iter().map(|d| d.lam_minus).collect(),
        lam_plus: discs.iter().map(|d| d.lam_plus).collect(),
        tau: discs.iter().map(|d| (d.lam_minus + d.lam_plus) / 2.0).collect(),
        gamma: discs.iter().map(|d| d.lam_plus - d.lam_minus).collect(),
        lam_dot: discs.iter().map(|d| d.lam_dot).collect(),
        disc_center: (-nm..=nm).map(|n| C64::new(n as f64 * PI, 0.0)).collect(),
        disc_radius: discs.iter().map(|d| d.radius).collect(),
        winding: discs.iter().map(|d| d.winding).collect(),
        iso_constant: PI,
        n_phi: 0,
        real_type: real,
        er: phi.is_er(),
        hamiltonians: h,
    };
    // collapsed gaps: the double eigenvalue is λ•
    for i in 0..sd.gamma.len() {
        if sd.gamma[i] == C64::new(0.0, 0.0) {
            sd.tau[i] = sd.lam_dot[i];
        }
    }
    certify(&mut sd)?;
    Ok(sd)
}

fn certify(sd: &mut SpectralData) -> Result<()> {
    let ns: Vec<i64> = sd.indices().collect();
    let mut c: f64 = PI;
    for (i, &n) in ns.iter().enumerate() {
        for (j, &m) in ns.iter().enumerate().skip(i + 1) {
            let dist = (sd.disc_center[j] - sd.disc_center[i]).norm() - sd.disc_radius[i] - sd.disc_radius[j];
            if dist <= 0.0 {
                return Err(ZsbError::Localization { n, reason: format!("disc overlaps disc {m}") });
            }
            c = c.max((m - n) as f64 / dist);
        }
    }
    sd.iso_constant = c;
    sd.n_phi = ns.iter().filter(|&&n| sd.disc_radius[sd.idx(n)] != DISC_RADIUS).map(|n| n.abs() + 1).max().unwrap_or(0);
    for w in ns.windows(2) {
        let (a, b) = (w[0], w[1]);
        if lex_cmp(&sd.lam_plus(a), &sd.lam_minus(b), 0.0).is_gt() {
            return Err(ZsbError::Localization { n: b, reason: "lexicographic ordering violated".into() });
        }
    }
    if sd.real_type {
        for &n in &ns {
            let (lm, ld, lp) = (sd.lam_minus(n).re, sd.lam_dot(n).re, sd.lam_plus(n).re);
            if !(lm <= ld + 1e-12 && ld <= lp + 1e-12) {
                return Err(ZsbError::Localization { n, reason: "real-type ordering lambda- <= lambda-dot <= lambda+ violated".into() });
            }
        }
    }
    Ok(())
}

/// Labeled sequences for decay fitting.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    /// `(n, (λ_n^• − τ_n)/γ_n²)` over open gaps.
    pub lamdot_offset: Vec<(i64, C64)>,
    /// `(n, max ± |λ_n^± − nπ|)` over the window.
    pub eigen_offset: Vec<(i64, f64)>,
    /// `(n, |γ_n|)` over the window.
    pub gap_length: Vec<(i64, f64)>,
}

pub fn gap_check(sd: &SpectralData, _phi: &Potential) -> GapReport {
    let lamdot_offset = sd
        .open_gaps()
        .into_iter()
        .map(|n| (n, (sd.lam_dot(n) - sd.tau(n)) / (sd.gamma(n) * sd.gamma(n))))
        .collect();
    let eigen_offset = sd
        .indices()
        .map(|n| {
            let c = C64::new(n as f64 * PI, 0.0);
            (n, (sd.lam_minus(n) - c).norm().max((sd.lam_plus(n) - c).norm()))
        })
        .collect();
    let gap_length = sd.indices().map(|n| (n, sd.gamma(n).norm())).collect();
    GapReport { lamdot_offset, eigen_offset, gap_length }
}
